"""Crossbar MAC tests: exact PWM dot product, PAM nonlinearity error, infer."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfneuron.crossbar import (
    PwmVector,
    SynapseArray,
    infer,
    mac_pam,
    mac_pwm,
)
from pfneuron.device import PfDeviceParams
from pfneuron.transient import ClockSpec, SimConfig

P = PfDeviceParams()
CLOCK = ClockSpec()
CFG = SimConfig()


def test_mac_pwm_worked_column():
    arr = SynapseArray(g=np.array([[1e-6], [2e-6]]), v_read=1.0)
    x = PwmVector(widths=(100e-6, 200e-6), t_max=1e-3)
    q = mac_pwm(arr, x)
    assert q[0] == pytest.approx(0.5e-9, rel=1e-12)  # 1e-10 + 4e-10


def test_mac_pwm_zero_widths():
    arr = SynapseArray(g=np.ones((3, 2)) * 1e-6)
    q = mac_pwm(arr, PwmVector(widths=(0.0, 0.0, 0.0), t_max=1e-3))
    assert np.all(q == 0.0)


def test_mac_pwm_unit_case():
    arr = SynapseArray(g=np.array([[1.0]]), v_read=1.0)
    q = mac_pwm(arr, PwmVector(widths=(1.0,), t_max=1.0))
    assert q[0] == pytest.approx(1.0)


def test_mac_pwm_dimension_mismatch():
    arr = SynapseArray(g=np.ones((3, 2)) * 1e-6)
    with pytest.raises(ValueError):
        mac_pwm(arr, PwmVector(widths=(1e-4, 1e-4), t_max=1e-3))


def test_mac_pam_linear_equals_dot():
    rng = np.random.default_rng(11)
    g = rng.uniform(0.1e-6, 1e-6, (5, 3))
    arr = SynapseArray(g=g, v_read=0.2)
    v = rng.uniform(0.05, 0.2, 5)
    assert mac_pam(arr, v) == pytest.approx(g.T @ v, rel=1e-12)


def test_mac_pam_normalization_point():
    # p(v) = v/v_read: exact at the read voltage
    g = np.full((4, 2), 0.5e-6)
    arr = SynapseArray(g=g, v_read=0.2, nonlinearity=(0.0, 5.0))
    v = np.full(4, 0.2)
    assert mac_pam(arr, v) == pytest.approx(g.T @ v, rel=1e-12)


def test_mac_pam_half_read_voltage_50_percent_error():
    arr = SynapseArray(g=np.array([[1e-6]]), v_read=0.2, nonlinearity=(0.0, 5.0))
    v = np.array([0.1])  # p(0.1) = 0.5
    ideal = 1e-6 * 0.1
    got = mac_pam(arr, v)[0]
    assert got == pytest.approx(0.5 * ideal, rel=1e-12)


def test_nonlinearity_rescaled_to_unit_at_v_read():
    arr = SynapseArray(g=np.ones((1, 1)), v_read=0.2, nonlinearity=(1.0, 3.0, 2.0))
    assert float(arr.p(0.2)) == pytest.approx(1.0, rel=1e-12)


def test_nonlinearity_vanishing_at_v_read_rejected():
    with pytest.raises(ValueError):
        SynapseArray(g=np.ones((1, 1)), v_read=0.2, nonlinearity=(0.2, -1.0))


def test_array_validation():
    with pytest.raises(ValueError):
        SynapseArray(g=np.array([1e-6, 2e-6]))  # 1-D
    with pytest.raises(ValueError):
        SynapseArray(g=np.array([[-1e-6]]))
    with pytest.raises(ValueError):
        PwmVector(widths=(2e-3,), t_max=1e-3)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_mac_pwm_exact_dot_product(seed):
    rng = np.random.default_rng(seed)
    g = rng.uniform(0.0, 1e-6, (8, 8))
    w = rng.uniform(0.0, 1e-3, 8)
    arr = SynapseArray(g=g, v_read=0.2, nonlinearity=(0.0, 2.0, 15.0))
    q = mac_pwm(arr, PwmVector(widths=tuple(w), t_max=1e-3))
    exact = np.array([sum(g[i][j] * 0.2 * w[i] for i in range(8)) for j in range(8)])
    np.testing.assert_allclose(q, exact, rtol=1e-12)


def test_pam_error_grows_with_distance_from_v_read():
    arr = SynapseArray(g=np.full((1, 1), 1e-6), v_read=0.2,
                       nonlinearity=(0.0, 0.0, 25.0))  # p = (v/v_read)^2
    errs = []
    for frac in (0.9, 0.6, 0.3):
        v = np.array([frac * 0.2])
        ideal = float((arr.g.T @ v)[0])
        errs.append(abs(float(mac_pam(arr, v)[0]) - ideal) / ideal)
    assert errs[0] < errs[1] < errs[2]


def test_infer_single_layer_preserves_order():
    g = np.diag([1e-6, 1e-6, 1e-6, 1e-6])
    arr = SynapseArray(g=g, v_read=0.2)
    v_in = np.array([1.9, 0.6, 1.2, 0.8])
    res = infer([arr], v_in, P, CLOCK, CFG)
    # t_p falls with v_in, so charges order opposite to inputs
    assert np.argsort(res.outputs).tolist() == np.argsort(-v_in).tolist()
    assert res.predicted == 1  # smallest input -> widest pulse -> largest charge


def test_infer_two_layer_matches_scalar_reference():
    from pfneuron.neuron import encode

    rng = np.random.default_rng(42)
    g1 = rng.uniform(0.1e-6, 1e-6, (4, 4))
    g2 = rng.uniform(0.1e-6, 1e-6, (4, 2))
    layers = [SynapseArray(g=g1, v_read=0.2), SynapseArray(g=g2, v_read=0.2)]
    v_in = rng.uniform(0.5, 2.0, 4)
    res = infer(layers, v_in, P, CLOCK, CFG, v_in_range=(0.5, 2.0))

    # independent scalar re-computation
    t_max = CLOCK.high_time
    w1 = [encode(P, float(v), CLOCK, CFG)[1] for v in v_in]
    q1 = [sum(g1[i][j] * 0.2 * w1[i] for i in range(4)) for j in range(4)]
    lo, hi = 0.5, 2.0
    span = max(q1) - min(q1)
    v2 = [lo + (q - min(q1)) * (hi - lo) / span for q in q1]
    w2 = [encode(P, float(v), CLOCK, CFG)[1] for v in v2]
    q2 = [sum(g2[i][j] * 0.2 * w2[i] for i in range(4)) for j in range(2)]

    np.testing.assert_allclose(res.outputs, q2, rtol=1e-9)
    np.testing.assert_allclose(res.layer_inputs[1], v2, rtol=1e-9)
    assert len(res.interlayer_maps) == 1


def test_infer_zero_inputs_zero_first_charges():
    g = np.full((3, 3), 1e-6)
    layers = [SynapseArray(g=g, v_read=0.2)]
    # inputs far above the latchable range -> t_p = 0 everywhere
    wide = PfDeviceParams(vg2_valid=(0.0, 100.0))
    res = infer(layers, np.array([50.0, 60.0, 70.0]), wide, CLOCK, CFG)
    assert all(q == 0.0 for q in res.outputs)


def test_infer_degenerate_span_raises():
    g = np.full((2, 2), 1e-6)  # identical columns -> equal charges
    layers = [SynapseArray(g=g, v_read=0.2), SynapseArray(g=g, v_read=0.2)]
    with pytest.raises(ValueError):
        infer(layers, np.array([1.0, 1.0]), P, CLOCK, CFG)


def test_infer_shape_mismatch_raises():
    a = SynapseArray(g=np.ones((2, 3)) * 1e-6)
    b = SynapseArray(g=np.ones((2, 2)) * 1e-6)
    with pytest.raises(ValueError):
        infer([a, b], np.array([1.0, 1.0]), P, CLOCK, CFG)
