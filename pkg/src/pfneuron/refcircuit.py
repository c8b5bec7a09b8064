"""Sawtooth-plus-comparator PWM reference circuit.

A pull-up current source charges a capacitor from zero at every clock
cycle start, giving a linear ramp v_saw = (i_pullup/c_saw)*(t - t0); an
ideal comparator against the input voltage produces a pulse whose width is
the ramp's crossing time. The clocked device reproduces this mapping (its
t_on equals the reference t_p) when its threshold-charge slope is matched
to i_inj*c_saw/i_pullup.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .device import PfDeviceParams


@dataclass(frozen=True)
class SawtoothSpec:
    i_pullup: float = 1e-6  # A, ramp charging current
    c_saw: float = 1e-9     # F, ramp capacitor
    v_dd: float = 1.2       # V, supply rail capping the ramp
    f_clk: float = 1000.0   # Hz

    def __post_init__(self):
        for name in ("i_pullup", "c_saw", "v_dd", "f_clk"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be > 0")

    @property
    def period(self) -> float:
        return 1.0 / self.f_clk

    @property
    def ramp_rate(self) -> float:
        """V/s."""
        return self.i_pullup / self.c_saw


def v_saw(spec: SawtoothSpec, t: float, duty: float = 1.0) -> float:
    """Ramp voltage at absolute time t >= 0.

    The ramp restarts at each cycle boundary, climbs at i_pullup/c_saw
    while the clock is high, and is capped at v_dd; during the clock-low
    phase it sits at the rail.
    """
    if not (t >= 0.0):
        raise ValueError("t must be >= 0")
    if not (0.0 < duty <= 1.0):
        raise ValueError("duty must be in (0, 1]")
    period = spec.period
    phase = t - math.floor(t / period) * period
    if phase >= duty * period:
        return spec.v_dd
    return min(spec.ramp_rate * phase, spec.v_dd)


def encode_ref(spec: SawtoothSpec, v_in: float) -> float:
    """Comparator pulse width for one cycle: the ramp's crossing time of v_in.

    t_p = clamp(v_in * c_saw / i_pullup, 0, 1/f_clk). Inputs at or below
    zero give zero width; inputs beyond the ramp's reach give the full
    period.
    """
    if not math.isfinite(v_in):
        raise ValueError("v_in must be finite")
    t_cross = v_in * spec.c_saw / spec.i_pullup
    return min(max(t_cross, 0.0), spec.period)


def match_pf_params(spec: SawtoothSpec, pf: PfDeviceParams) -> PfDeviceParams:
    """Device parameters whose latch time equals the reference pulse width.

    Latch time is q_th/i_inj = (qth_slope/i_inj)*v_in, so setting
    qth_slope = i_inj * c_saw / i_pullup (with zero offset and no leakage)
    reproduces t_on(v) = (c_saw/i_pullup)*v exactly — assuming the clock
    high level sits at the injection reference, where i_inj = inj_i0.
    """
    return dataclasses.replace(
        pf,
        qth_slope=pf.inj_i0 * spec.c_saw / spec.i_pullup,
        qth_offset=0.0,
        tau_leak=math.inf,
    )
