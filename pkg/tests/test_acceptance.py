"""Acceptance gate: the eight release criteria, one pass/fail line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the PASS/FAIL lines;
each criterion is a single test with its tolerances spelled out inline.
"""

import math
import time
from contextlib import contextmanager

import numpy as np

from pfneuron.calibration import TonDataset, fit_leaky, fit_linear
from pfneuron.crossbar import PwmVector, SynapseArray, mac_pam, mac_pwm
from pfneuron.device import PfDeviceParams, dc_transfer_sweep, injection_current
from pfneuron.neuron import activation_curve
from pfneuron.refcircuit import SawtoothSpec, encode_ref, match_pf_params
from pfneuron.transient import ClockSpec, SimConfig, Stimulus, extract_t_on, simulate
from pfneuron import cli

T_TOL = 1e-9


@contextmanager
def report(n, label):
    try:
        yield
    except BaseException:
        print(f"\nFAIL: criterion {n} — {label}")
        raise
    print(f"\nPASS: criterion {n} — {label}")


def test_criterion_1_vin_ton_linearity():
    with report(1, "V_in to t_on linearity (16 points, r^2 and 2*t_tol per point, < 5 s)"):
        params = PfDeviceParams()          # tau_leak = inf
        clock = ClockSpec()                # 1 kHz, full duty
        cfg = SimConfig()                  # t_tol = 1 ns
        i_dn = injection_current(params, clock.v_high)
        v_grid = np.linspace(0.5, 2.0, 16)

        start = time.perf_counter()
        curve = activation_curve(params, v_grid, clock, cfg, workers=1)
        elapsed = time.perf_counter() - start
        assert elapsed < 5.0, f"sweep took {elapsed:.2f} s"

        t_on = np.array([p.t_on for p in curve.points], dtype=float)
        assert not np.isnan(t_on).any()
        expected = (params.qth_slope * v_grid + params.qth_offset) / i_dn
        assert np.max(np.abs(t_on - expected)) <= 2 * T_TOL

        r_sq = float(np.corrcoef(v_grid, t_on)[0, 1]) ** 2
        assert r_sq >= 0.999999, f"r^2 = {r_sq}"


def test_criterion_2_hard_sigmoid_shape():
    with report(2, "hard-sigmoid shape (saturation rails, strictly decreasing affine middle)"):
        params = PfDeviceParams(vg2_valid=(-1.0, 4.0))
        clock = ClockSpec(f_clk=5000.0)
        cfg = SimConfig()
        v_grid = np.arange(-0.5, 3.0 + 1e-9, 0.25)
        curve = activation_curve(params, v_grid, clock, cfg, workers=1)
        t_max = curve.t_max
        t_p = np.array([p.t_p for p in curve.points])

        assert t_p[0] == t_max            # low end pinned at full width
        assert t_p[-1] == 0.0             # high end pinned at zero
        assert np.all((t_p >= 0.0) & (t_p <= t_max))   # clipping invariant

        mid = t_p[(t_p > 0.0) & (t_p < t_max)]
        assert mid.size >= 5
        diffs = np.diff(mid)
        assert np.all(diffs < 0.0)        # strictly decreasing
        assert np.max(np.abs(np.diff(diffs))) <= 4 * T_TOL   # affine middle


def test_criterion_3_event_timing_randomized():
    with report(3, "event timing vs closed-form leaky solution (100 randomized triples)"):
        rng = np.random.default_rng(20260819)
        clock = ClockSpec()
        cfg = SimConfig()
        t_max = clock.high_time
        for _ in range(100):
            i_dn = 10.0 ** rng.uniform(math.log10(20e-12), math.log10(2e-9))
            tau = 10.0 ** rng.uniform(math.log10(2e-4), 0.0)
            q_max = i_dn * tau * -math.expm1(-t_max / tau)
            u = rng.uniform(0.05, 0.95)
            latching = rng.uniform() < 0.7
            q_th = u * q_max if latching else (1.0 + u) * q_max

            params = PfDeviceParams(qth_slope=q_th, inj_i0=i_dn, tau_leak=tau)
            wf = simulate(params, Stimulus(clock=clock, v_g2=1.0), cfg)
            t_on = extract_t_on(wf, 0)
            if latching:
                exact = -tau * math.log1p(-q_th / (i_dn * tau))
                assert t_on is not None
                assert abs(t_on - exact) <= T_TOL, (q_th, i_dn, tau)
            else:
                assert t_on is None, (q_th, i_dn, tau)


def test_criterion_4_dc_transfer():
    with report(4, "DC transfer: V_G1,on increases with V_G2, on/off >= 1e5, exact formula"):
        params = PfDeviceParams(tau_leak=1e-3)
        grid = [round(0.005 * k, 10) for k in range(161)]   # 0 .. 0.8 V
        v_on_seen = []
        for v_g2 in (0.5, 1.0, 1.5, 2.0):
            curve = dc_transfer_sweep(params, v_g2, grid, v_a=1.0)
            q_th = params.qth_slope * v_g2 + params.qth_offset
            formula = params.inj_vref + params.inj_ss * math.log10(
                q_th / (params.inj_i0 * params.tau_leak)
            )
            assert abs(curve.v_g1_on - formula) <= 1e-9
            currents = [i for _, i in curve.points]
            assert max(currents) / min(currents) >= 1e5
            v_on_seen.append(curve.v_g1_on)
        assert all(b > a for a, b in zip(v_on_seen, v_on_seen[1:]))


def test_criterion_5_reference_circuit_equivalence():
    with report(5, "PF t_on matches sawtooth-comparator t_p on a 151-point grid (2*t_tol)"):
        saw = SawtoothSpec(i_pullup=1e-6, c_saw=1e-9, v_dd=1.2, f_clk=1000.0)
        pf = match_pf_params(saw, PfDeviceParams())
        clock = ClockSpec(f_clk=saw.f_clk)
        cfg = SimConfig()
        t_max = clock.high_time
        v_grid = np.linspace(0.0, 1.5, 151)
        curve = activation_curve(pf, v_grid, clock, cfg, workers=1)
        worst = 0.0
        for point in curve.points:
            t_ref = encode_ref(saw, point.v_in)
            t_pf = t_max if point.t_on is None else point.t_on
            worst = max(worst, abs(t_pf - t_ref))
            assert 0.0 <= t_ref <= t_max
            assert 0.0 <= point.t_p <= t_max
            if point.v_in == 0.0:                    # bottom clamp
                assert t_ref == 0.0 and point.t_on == 0.0
            if point.v_in >= 1.02:                   # interior of the top clamp
                assert t_ref == t_max and point.t_on is None
        assert worst <= 2 * T_TOL, f"worst |t_on - t_p| = {worst:.3e} s"


def test_criterion_6_crossbar_mac_accuracy():
    with report(6, "PWM MAC exact to 1e-12; PAM error >= 1e3 x larger under quadratic synapses"):
        rng = np.random.default_rng(77)
        v_read = 0.2
        t_max = 1e-3
        quad = (0.0, 0.0, 1.0 / v_read**2)   # p(v_read) = 1 after rescaling
        pwm_errs, pam_errs = [], []
        for _ in range(100):
            g = rng.uniform(0.1e-6, 1.0e-6, size=(8, 8))
            v = rng.uniform(0.25, 1.0, size=8) * v_read
            linear = SynapseArray(g, v_read=v_read, nonlinearity=None)
            bent = SynapseArray(g, v_read=v_read, nonlinearity=quad)

            widths = (v / v_read) * t_max
            q = mac_pwm(linear, PwmVector(widths=widths, t_max=t_max))
            q_exact = np.array([
                sum(g[i][j] * v[i] * t_max for i in range(8)) for j in range(8)
            ])
            pwm_errs.append(np.max(np.abs(q - q_exact) / q_exact))

            i_pam = mac_pam(bent, v)
            i_exact = np.array([
                sum(g[i][j] * v[i] for i in range(8)) for j in range(8)
            ])
            pam_errs.append(np.mean(np.abs(i_pam - i_exact) / i_exact))

        assert max(pwm_errs) <= 1e-12
        pwm_mean = max(np.mean(pwm_errs), np.finfo(float).tiny)
        assert np.mean(pam_errs) / pwm_mean >= 1e3


def test_criterion_7_calibration_round_trip():
    with report(7, "calibration round trip (noiseless 1e-9; 1% noise -> 2%; tau within 1%)"):
        slope, offset = 1e-4, 2e-5
        v = np.linspace(0.5, 2.0, 32)
        rep = fit_linear(TonDataset(v_in=v, t_on=slope * v + offset))
        assert abs(rep.qth_slope_over_idn - slope) / slope <= 1e-9
        assert abs(rep.qth_offset_over_idn - offset) / offset <= 1e-9

        rng = np.random.default_rng(4242)
        v_n = np.linspace(0.5, 2.0, 500)
        noisy = (slope * v_n + offset) * (1.0 + 0.01 * rng.standard_normal(500))
        rep_n = fit_linear(TonDataset(v_in=v_n, t_on=noisy))
        assert abs(rep_n.qth_slope_over_idn - slope) / slope <= 0.02
        assert abs(rep_n.qth_offset_over_idn - offset) / offset <= 0.02

        tau = 1e-3
        t = -tau * np.log1p(-(slope * v) / tau)
        rep_l = fit_leaky(TonDataset(v_in=v, t_on=t))
        assert abs(rep_l.tau_leak_est - tau) / tau <= 0.01


def test_criterion_8_determinism(tmp_path):
    with report(8, "byte-identical outputs for every experiment kind (same config + seed)"):
        kinds = {
            "iv-sweep": "experiment = iv-sweep\ndevice.tau_leak = 1e-3\n",
            "transient": "experiment = transient\ntransient.v_g2 = 2.0\n",
            "activation": "experiment = activation\nactivation.points = 8\n",
            "compare-ref": "experiment = compare-ref\ncompare-ref.points = 31\n",
            "calibrate": "experiment = calibrate\ncalibrate.noise = 0.01\nseed = 11\n",
            "infer": "experiment = infer\nseed = 11\n",
        }
        for kind, text in kinds.items():
            cfg_path = tmp_path / f"{kind}.cfg"
            cfg_path.write_text(text)
            outs = []
            for tag in ("a", "b"):
                out = tmp_path / f"{kind}-{tag}"
                assert cli.run(cfg_path, out, quiet=True) == 0, kind
                outs.append({
                    p.relative_to(out).as_posix(): p.read_bytes()
                    for p in sorted(out.rglob("*")) if p.is_file()
                })
            assert outs[0].keys() == outs[1].keys(), kind
            for name in outs[0]:
                assert outs[0][name] == outs[1][name], f"{kind}/{name} differs"
