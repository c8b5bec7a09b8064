"""Time-stepped transient simulation of the clocked device.

Each clock cycle starts with the charge reset to zero and integrates the
injection current while the clock is high. Because the bias is piecewise
constant, the charge trajectory inside every segment has a closed form
(linear ramp, or exponential relaxation toward i_inj * tau_leak); samples
are taken from that expression at fixed-dt step boundaries, and the latch
crossing is bracketed on the same boundaries and refined by bisection of
the closed-form expression down to ``t_tol``. Event accuracy is therefore
decoupled from the step size.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .device import (
    PfDeviceParams,
    injection_current,
    on_state_current,
    threshold_charge,
)

_BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class ClockSpec:
    """Clock waveform applied to the first gate."""

    f_clk: float = 1000.0   # Hz
    v_high: float = 0.45    # V
    v_low: float = 0.0      # V
    duty: float = 1.0       # fraction of the period spent high, in (0, 1]

    def __post_init__(self):
        if not (self.f_clk > 0):
            raise ValueError("f_clk must be > 0")
        if not (self.v_high > self.v_low):
            raise ValueError("v_high must exceed v_low")
        if not (0.0 < self.duty <= 1.0):
            raise ValueError("duty must be in (0, 1]")

    @property
    def period(self) -> float:
        return 1.0 / self.f_clk

    @property
    def high_time(self) -> float:
        """Duration of the high phase; equals the maximum output pulse width."""
        return self.duty / self.f_clk


@dataclass(frozen=True)
class PiecewiseConstant:
    """Piecewise-constant signal: value(t) = values[i] for times[i] <= t < times[i+1]."""

    times: tuple[float, ...]    # s, strictly ascending, starting at 0
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) == 0 or len(self.times) != len(self.values):
            raise ValueError("times and values must be nonempty and equal length")
        if self.times[0] != 0.0:
            raise ValueError("first breakpoint must be t=0")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("breakpoints must be strictly ascending")

    @classmethod
    def from_segments(cls, segments: list[tuple[float, float, float]]) -> "PiecewiseConstant":
        """Build from (t_start, t_end, value) segments, which must be contiguous."""
        if not segments:
            raise ValueError("segments must be nonempty")
        times, values = [], []
        cursor = segments[0][0]
        if cursor != 0.0:
            raise ValueError("segments must start at t=0")
        for t0, t1, v in segments:
            if t0 != cursor:
                raise ValueError("segments must be contiguous and nonoverlapping")
            if not t1 > t0:
                raise ValueError("segment end must exceed its start")
            times.append(t0)
            values.append(v)
            cursor = t1
        return cls(times=tuple(times), values=tuple(values))

    def value(self, t: float) -> float:
        return self.values[bisect.bisect_right(self.times, t) - 1]

    def breakpoints_in(self, t0: float, t1: float) -> list[float]:
        """Breakpoints strictly inside the open interval (t0, t1)."""
        return [t for t in self.times if t0 < t < t1]


@dataclass(frozen=True)
class Stimulus:
    """Clocked bias scheme: clock on gate 1, input level on gate 2, fixed anode bias."""

    clock: ClockSpec = field(default_factory=ClockSpec)
    v_g2: float | PiecewiseConstant = 1.0
    v_a: float = 1.0
    v_c: float = 0.0
    n_cycles: int = 1

    def __post_init__(self):
        if self.n_cycles < 1:
            raise ValueError("n_cycles must be >= 1")

    def v_g2_at(self, t: float) -> float:
        if isinstance(self.v_g2, PiecewiseConstant):
            return self.v_g2.value(t)
        return self.v_g2


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-6             # s, sampling step
    t_tol: float = 1e-9          # s, latch-event refinement tolerance
    sample_stride: int = 1       # record every n-th step boundary
    i_compliance: float = 10e-6  # A, on-state current clip

    def __post_init__(self):
        if not (self.dt > 0):
            raise ValueError("dt must be > 0")
        if not (0.0 < self.t_tol <= self.dt):
            raise ValueError("t_tol must satisfy 0 < t_tol <= dt")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")
        if not (self.i_compliance > 0):
            raise ValueError("i_compliance must be > 0")


@dataclass(frozen=True)
class TurnOnEvent:
    """Latch instant of one clock cycle."""

    cycle_index: int
    t_on: float           # s, relative to cycle start
    absolute_time: float  # s


@dataclass(frozen=True)
class Waveform:
    """Sampled traces plus refined per-cycle latch events."""

    t: np.ndarray         # s
    q_n: np.ndarray       # C
    i_a: np.ndarray       # A
    latched: np.ndarray   # bool
    events: tuple[TurnOnEvent, ...]
    n_cycles: int


def _charge_after(q0: float, i_inj: float, tau: float, dt: float) -> float:
    """Closed-form stored charge a time dt after q0 under constant drive."""
    if math.isinf(tau):
        return q0 + i_inj * dt
    q_inf = i_inj * tau
    return q_inf + (q0 - q_inf) * math.exp(-dt / tau)


def _refine_crossing(
    q0: float, i_inj: float, tau: float, q_th: float,
    lo: float, hi: float, t_tol: float,
) -> float:
    """Bisect the closed-form charge (anchored at offset 0 with q0) for q = q_th.

    lo/hi are offsets from the anchor bracketing the crossing. The charge is
    monotone over the bracket, so bisection always converges; the iteration
    cap only guards against a malformed bracket.
    """
    for _ in range(_BISECT_MAX_ITER):
        if hi - lo <= t_tol:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        if _charge_after(q0, i_inj, tau, mid) >= q_th:
            hi = mid
        else:
            lo = mid
    raise RuntimeError("latch-event bisection failed to converge (internal error)")


def _phase_boundaries(duration: float, dt: float) -> list[float]:
    """Step-boundary offsets j*dt strictly inside (0, duration), plus duration."""
    m = int(math.floor(duration / dt))
    while m * dt >= duration:
        m -= 1
    return [j * dt for j in range(1, m + 1)] + [duration]


def simulate(params: PfDeviceParams, stim: Stimulus, cfg: SimConfig) -> Waveform:
    """Run the device through ``stim.n_cycles`` clock cycles.

    The latch clears and the charge resets to zero on every falling clock
    edge; during the clock-low phase the device is held off (no
    integration). One TurnOnEvent is recorded per latching cycle.
    """
    clock = stim.clock
    period = clock.period
    if cfg.dt > period / 100.0:
        raise ValueError("dt must be <= clock period / 100")

    i_high = injection_current(params, clock.v_high)
    i_on = on_state_current(params, stim.v_a, stim.v_c, cfg.i_compliance)
    tau = params.tau_leak

    ts: list[float] = [0.0]
    qs: list[float] = []
    ias: list[float] = []
    flags: list[bool] = []
    events: list[TurnOnEvent] = []

    for k in range(stim.n_cycles):
        t_cycle = k * period
        t_high_end = t_cycle + clock.high_time

        # constant-bias segments of the high phase: clock edges plus any
        # v_g2 breakpoints falling inside it
        seg_starts = [t_cycle]
        if isinstance(stim.v_g2, PiecewiseConstant):
            seg_starts += stim.v_g2.breakpoints_in(t_cycle, t_high_end)
        seg_bounds = seg_starts + [t_high_end]

        # anchors[i] = exact charge at seg_bounds[i] (before any latch)
        anchors = [0.0]
        event: TurnOnEvent | None = None
        event_q = 0.0
        for i in range(len(seg_bounds) - 1):
            s0, s1 = seg_bounds[i], seg_bounds[i + 1]
            q_s = anchors[-1]
            if event is None:
                q_th = threshold_charge(params, stim.v_g2_at(s0))
                if q_s >= q_th:
                    t_event = s0
                    event_q = q_s if q_s > q_th else q_th
                    event = TurnOnEvent(k, t_event - t_cycle, t_event)
                else:
                    prev = 0.0
                    for off in _phase_boundaries(s1 - s0, cfg.dt):
                        if _charge_after(q_s, i_high, tau, off) >= q_th:
                            t_off = _refine_crossing(
                                q_s, i_high, tau, q_th, prev, off, cfg.t_tol
                            )
                            t_event = s0 + t_off
                            event_q = q_th
                            event = TurnOnEvent(k, t_event - t_cycle, t_event)
                            break
                        prev = off
            anchors.append(_charge_after(q_s, i_high, tau, s1 - s0))

        if event is not None:
            events.append(event)

        def q_at(t: float) -> float:
            i = bisect.bisect_right(seg_bounds, t) - 1
            i = min(i, len(seg_bounds) - 2)
            return _charge_after(anchors[i], i_high, tau, t - seg_bounds[i])

        # high-phase samples on the fixed grid (stride-filtered; phase end always kept)
        offsets = _phase_boundaries(clock.high_time, cfg.dt)
        for j, off in enumerate(offsets, start=1):
            if j % cfg.sample_stride != 0 and off != offsets[-1]:
                continue
            t = t_cycle + off
            if event is not None and t >= event.absolute_time:
                ts.append(t); qs.append(event_q); ias.append(i_on); flags.append(True)
            else:
                ts.append(t); qs.append(q_at(t)); ias.append(params.i_off); flags.append(False)

        # low-phase samples: device held in reset after the falling edge
        if clock.duty < 1.0:
            low = _phase_boundaries(period - clock.high_time, cfg.dt)
            for j, off in enumerate(low, start=1):
                if j % cfg.sample_stride != 0 and off != low[-1]:
                    continue
                t = t_high_end + off
                ts.append(t); qs.append(0.0); ias.append(params.i_off); flags.append(False)

    # initial sample at t=0 follows the same rule as any other boundary
    first_event = events[0] if events and events[0].cycle_index == 0 else None
    if first_event is not None and first_event.absolute_time <= 0.0:
        qs.insert(0, threshold_charge(params, stim.v_g2_at(0.0)))
        ias.insert(0, i_on)
        flags.insert(0, True)
    else:
        qs.insert(0, 0.0)
        ias.insert(0, params.i_off)
        flags.insert(0, False)

    return Waveform(
        t=np.asarray(ts, dtype=float),
        q_n=np.asarray(qs, dtype=float),
        i_a=np.asarray(ias, dtype=float),
        latched=np.asarray(flags, dtype=bool),
        events=tuple(events),
        n_cycles=stim.n_cycles,
    )


def extract_t_on(wf: Waveform, cycle: int) -> float | None:
    """Latch time of the given cycle relative to its start, or None if it never latched."""
    if not (0 <= cycle < wf.n_cycles):
        raise IndexError(f"cycle {cycle} out of range (n_cycles={wf.n_cycles})")
    for ev in wf.events:
        if ev.cycle_index == cycle:
            return ev.t_on
    return None


def waveform_to_csv(wf: Waveform, path) -> None:
    """Write the sampled traces as CSV with header t_s,q_n_C,i_a_A,latched."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("t_s,q_n_C,i_a_A,latched\n")
        for t, q, i, lat in zip(wf.t, wf.q_n, wf.i_a, wf.latched):
            f.write(f"{float(t)!r},{float(q)!r},{float(i)!r},{int(lat)}\n")


def events_to_json(wf: Waveform, path) -> None:
    """Write the latch events as a JSON list of {cycle, t_on_s} records."""
    records = [{"cycle": ev.cycle_index, "t_on_s": ev.t_on} for ev in wf.events]
    with open(path, "w", encoding="utf-8") as f:
        json.dump(records, f, indent=2, sort_keys=True)
        f.write("\n")
