"""Behavioral compact model of a two-gate positive-feedback device.

The device is reduced to four ingredients: a threshold charge set linearly
by the second gate, an injection current set exponentially by the first
gate, a floating-body charge that integrates the injection (with optional
leakage), and an abrupt latch into a diode-like on-state once the stored
charge reaches threshold. All quantities are SI (volts, amperes, coulombs,
seconds, farads).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

# On-state current clip, mirroring the compliance setting of a measurement
# setup. Prevents the exponential diode law from overflowing.
DEFAULT_COMPLIANCE = 10e-6  # A


class ValidityWarning(UserWarning):
    """A bias point fell outside the fitted validity range of a model law."""


@dataclass(frozen=True)
class PfDeviceParams:
    """Behavioral constants of the device.

    The threshold charge follows q_th(v_g2) = qth_slope * v_g2 + qth_offset,
    clamped at zero, inside the ``vg2_valid`` interval. The injection current
    follows a subthreshold exponential around (inj_vref, inj_i0) with swing
    inj_ss volts per decade. The on-state anode current is a diode law
    i_a = diode_is * (exp(v / (diode_n * thermal_v)) - 1).
    """

    qth_slope: float = 10e-15        # C/V, slope of the threshold-charge line
    qth_offset: float = 0.0          # C, intercept of the threshold-charge line
    vg2_valid: tuple[float, float] = (0.0, 2.5)  # V, validity of the linear law
    inj_i0: float = 100e-12          # A, injection current at v_g1 = inj_vref
    inj_vref: float = 0.45           # V, reference first-gate bias
    inj_ss: float = 0.1              # V/decade, subthreshold swing
    tau_leak: float = math.inf       # s, floating-body relaxation constant
    i_off: float = 1e-12             # A, off-state anode leakage
    diode_is: float = 1e-15          # A, diode saturation current
    diode_n: float = 1.0             # diode ideality factor
    thermal_v: float = 0.02585       # V, thermal voltage

    def __post_init__(self):
        if not (self.qth_slope > 0):
            raise ValueError("qth_slope must be > 0")
        if not (self.inj_i0 > 0 and self.inj_ss > 0):
            raise ValueError("inj_i0 and inj_ss must be > 0")
        if not (self.i_off > 0):
            raise ValueError("i_off must be > 0")
        if not (self.tau_leak > 0):
            raise ValueError("tau_leak must be > 0 (infinite allowed)")
        if not (self.diode_is > 0 and self.diode_n > 0 and self.thermal_v > 0):
            raise ValueError("diode parameters must be > 0")
        lo, hi = self.vg2_valid
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError("vg2_valid must be a finite interval (lo, hi) with lo < hi")
        if not math.isfinite(self.qth_offset):
            raise ValueError("qth_offset must be finite")


@dataclass(frozen=True)
class PfDeviceState:
    """Floating-body charge magnitude, latch flag, and current time."""

    q_n: float = 0.0      # C, stored charge magnitude
    latched: bool = False
    t: float = 0.0        # s

    def __post_init__(self):
        if self.q_n < 0:
            raise ValueError("q_n must be >= 0")


@dataclass(frozen=True)
class BiasPoint:
    """Terminal voltages applied to the device."""

    v_g1: float
    v_g2: float
    v_a: float = 1.0
    v_c: float = 0.0

    def __post_init__(self):
        for name in ("v_g1", "v_g2", "v_a", "v_c"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class DcTransferCurve:
    """Quasi-static anode-current curve versus first-gate bias.

    ``v_g1_on`` is the turn-on bias at which the steady-state stored charge
    reaches the threshold charge; -inf when the threshold is zero.
    """

    points: tuple[tuple[float, float], ...]  # (v_g1 [V], i_a [A])
    v_g1_on: float                           # V


def threshold_charge(params: PfDeviceParams, v_g2: float) -> float:
    """Threshold charge (C) at the given second-gate bias.

    Linear in v_g2 with a clamp floor at zero. Emits a ValidityWarning when
    v_g2 lies outside the fitted range; the linear extrapolation is still
    returned.
    """
    if not math.isfinite(v_g2):
        raise ValueError("v_g2 must be finite")
    lo, hi = params.vg2_valid
    if not (lo <= v_g2 <= hi):
        warnings.warn(
            f"v_g2={v_g2:g} V outside threshold-charge validity range [{lo:g}, {hi:g}] V",
            ValidityWarning,
            stacklevel=2,
        )
    return max(0.0, params.qth_slope * v_g2 + params.qth_offset)


def injection_current(params: PfDeviceParams, v_g1: float) -> float:
    """Injection current (A) charging the floating body at the given v_g1."""
    if not math.isfinite(v_g1):
        raise ValueError("v_g1 must be finite")
    return params.inj_i0 * 10.0 ** ((v_g1 - params.inj_vref) / params.inj_ss)


def on_state_current(
    params: PfDeviceParams, v_a: float, v_c: float = 0.0,
    i_compliance: float = DEFAULT_COMPLIANCE,
) -> float:
    """Latched anode current (A): diode law at v_a - v_c, compliance-clipped."""
    x = (v_a - v_c) / (params.diode_n * params.thermal_v)
    # exp overflows long after the compliance clip is reached
    x_clip = math.log(i_compliance / params.diode_is + 1.0)
    if x >= x_clip:
        return i_compliance
    return params.diode_is * math.expm1(x)


def anode_current(
    params: PfDeviceParams, state: PfDeviceState, bias: BiasPoint,
    i_compliance: float = DEFAULT_COMPLIANCE,
) -> float:
    """Anode current (A): off-state leakage, or the clipped diode law when latched."""
    if state.latched:
        return on_state_current(params, bias.v_a, bias.v_c, i_compliance)
    return params.i_off


def step(
    params: PfDeviceParams, state: PfDeviceState, bias: BiasPoint, dt: float,
) -> PfDeviceState:
    """Advance the device state by one explicit-Euler step of length dt.

    While unlatched, the stored charge integrates the injection current
    minus the leak term, floored at zero; the latch engages when the
    updated charge reaches the threshold charge. Once latched, the charge
    is held at its latch-time value and only time advances.
    """
    if not (dt > 0):
        raise ValueError("dt must be > 0")
    if state.latched:
        return replace(state, t=state.t + dt)
    i_inj = injection_current(params, bias.v_g1)
    leak = 0.0 if math.isinf(params.tau_leak) else state.q_n / params.tau_leak
    q_new = max(0.0, state.q_n + (i_inj - leak) * dt)
    latched = q_new >= threshold_charge(params, bias.v_g2)
    return PfDeviceState(q_n=q_new, latched=latched, t=state.t + dt)


def reset(state: PfDeviceState) -> PfDeviceState:
    """Clear the latch and the stored charge (clock falling edge)."""
    return PfDeviceState(q_n=0.0, latched=False, t=state.t)


def dc_transfer_sweep(
    params: PfDeviceParams,
    v_g2: float,
    v_g1_grid: list[float],
    v_a: float = 1.0,
    v_c: float = 0.0,
    i_compliance: float = DEFAULT_COMPLIANCE,
) -> DcTransferCurve:
    """Quasi-static anode current versus v_g1 at fixed v_g2.

    The device is taken as latched wherever the steady-state stored charge
    i_inj(v_g1) * tau_leak reaches the threshold charge, which happens at

        v_g1_on = inj_vref + inj_ss * log10(q_th / (inj_i0 * tau_leak)).

    Requires a finite tau_leak: with no leak any nonzero injection would
    eventually latch at every bias and the curve would be degenerate.
    """
    if math.isinf(params.tau_leak):
        raise ValueError("dc_transfer_sweep requires finite tau_leak")
    if len(v_g1_grid) == 0:
        raise ValueError("v_g1_grid must be nonempty")
    if any(b <= a for a, b in zip(v_g1_grid, v_g1_grid[1:])):
        raise ValueError("v_g1_grid must be strictly ascending")

    q_th = threshold_charge(params, v_g2)
    if q_th <= 0.0:
        v_on = -math.inf  # zero threshold: latched at any bias
    else:
        v_on = params.inj_vref + params.inj_ss * math.log10(
            q_th / (params.inj_i0 * params.tau_leak)
        )

    i_on = on_state_current(params, v_a, v_c, i_compliance)
    points = tuple(
        (v1, i_on if injection_current(params, v1) * params.tau_leak >= q_th else params.i_off)
        for v1 in v_g1_grid
    )
    return DcTransferCurve(points=points, v_g1_on=v_on)
