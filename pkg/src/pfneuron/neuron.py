"""PWM neuron built on the clocked device.

The input voltage on gate 2 sets the threshold charge, so the latch time
t_on rises linearly with the input and the remaining high-phase width
t_p = t_max - t_on falls linearly, clamped to [0, t_max]: a hard-sigmoid
activation encoded as a pulse width.
"""

from __future__ import annotations

import dataclasses
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import fileio
from .device import PfDeviceParams
from .transient import ClockSpec, SimConfig, Stimulus, extract_t_on, simulate


@dataclass(frozen=True)
class ActivationPoint:
    v_in: float           # V, gate-2 input level
    t_on: float | None    # s, latch time within the cycle; None if never latched
    t_p: float            # s, output pulse width in [0, t_max]


@dataclass(frozen=True)
class ActivationCurve:
    points: tuple[ActivationPoint, ...]
    t_max: float          # s, clock high time = maximum pulse width


@dataclass(frozen=True)
class HardSigmoidFit:
    """Clamped-line fit t_p(v) = clip(intercept + slope*v, 0, t_max).

    v_low/v_high are the saturation corners where the line meets t_p = t_max
    and t_p = 0 (in whichever order the polarity puts them).
    """

    slope: float          # s/V
    intercept: float      # s
    v_low: float          # V, lower knee
    v_high: float         # V, upper knee
    t_max: float          # s
    polarity: str         # "descending" or "ascending"
    r_squared: float      # over the unsaturated points
    max_residual: float   # s, largest |residual| among unsaturated points
    n_unsaturated: int

    def predict(self, v):
        return np.clip(self.intercept + self.slope * np.asarray(v, dtype=float),
                       0.0, self.t_max)


def encode(
    params: PfDeviceParams,
    v_in: float,
    clock: ClockSpec,
    cfg: SimConfig,
    v_a: float = 1.0,
    v_c: float = 0.0,
) -> tuple[float | None, float]:
    """Run one clock cycle at the given input; return (t_on, t_p).

    t_p = clamp(t_max - t_on, 0, t_max); a cycle that never latches encodes
    zero width (t_on is None), and an immediate latch encodes t_max.
    """
    stim = Stimulus(clock=clock, v_g2=v_in, v_a=v_a, v_c=v_c, n_cycles=1)
    wf = simulate(params, stim, cfg)
    t_on = extract_t_on(wf, 0)
    t_max = clock.high_time
    if t_on is None:
        return None, 0.0
    return t_on, min(max(t_max - t_on, 0.0), t_max)


def _encode_task(args) -> ActivationPoint:
    params, v_in, clock, cfg, v_a, v_c = args
    t_on, t_p = encode(params, v_in, clock, cfg, v_a, v_c)
    return ActivationPoint(v_in=v_in, t_on=t_on, t_p=t_p)


def activation_curve(
    params: PfDeviceParams,
    v_grid,
    clock: ClockSpec,
    cfg: SimConfig,
    workers: int | None = 1,
    v_a: float = 1.0,
    v_c: float = 0.0,
) -> ActivationCurve:
    """Sweep an ascending input grid, one cycle per point.

    workers > 1 (or None for the CPU count) fans the points out over a
    process pool; results keep grid order either way.
    """
    grid = [float(v) for v in np.asarray(v_grid, dtype=float).ravel()]
    if not grid:
        raise ValueError("v_grid must be nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("v_grid must be strictly ascending")
    if workers is None:
        workers = os.cpu_count() or 1
    if workers < 1:
        raise ValueError("workers must be >= 1")

    tasks = [(params, v, clock, cfg, v_a, v_c) for v in grid]
    if workers == 1 or len(grid) == 1:
        points = [_encode_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_encode_task, tasks))
    return ActivationCurve(points=tuple(points), t_max=clock.high_time)


def fit_hard_sigmoid(curve: ActivationCurve) -> HardSigmoidFit:
    """Least-squares line through the unsaturated points (0 < t_p < t_max).

    The knees are where the fitted line meets t_p = 0 and t_p = t_max.
    Needs at least three unsaturated points and a nonzero slope.
    """
    t_max = curve.t_max
    unsat = [(p.v_in, p.t_p) for p in curve.points if 0.0 < p.t_p < t_max]
    if len(unsat) < 3:
        raise ValueError("need at least 3 unsaturated points to fit")
    v = np.array([u[0] for u in unsat])
    tp = np.array([u[1] for u in unsat])
    v_mean, tp_mean = v.mean(), tp.mean()
    s_vv = float(np.sum((v - v_mean) ** 2))
    if s_vv == 0.0:
        raise ValueError("unsaturated points share a single input voltage")
    slope = float(np.sum((v - v_mean) * (tp - tp_mean)) / s_vv)
    if slope == 0.0:
        raise ValueError("degenerate fit: zero slope")
    intercept = float(tp_mean - slope * v_mean)

    v_at_zero = -intercept / slope
    v_at_max = (t_max - intercept) / slope
    v_low, v_high = sorted((v_at_zero, v_at_max))

    resid = tp - (intercept + slope * v)
    ss_tot = float(np.sum((tp - tp_mean) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot

    return HardSigmoidFit(
        slope=slope,
        intercept=intercept,
        v_low=float(v_low),
        v_high=float(v_high),
        t_max=t_max,
        polarity="descending" if slope < 0 else "ascending",
        r_squared=min(max(r_squared, 0.0), 1.0),
        max_residual=float(np.max(np.abs(resid))),
        n_unsaturated=len(unsat),
    )


def curve_to_csv(curve: ActivationCurve, path) -> None:
    """Write the sweep as CSV with header v_in_V,t_on_s,t_p_s (nan for no latch)."""
    fileio.write_csv(
        path,
        ("v_in_V", "t_on_s", "t_p_s"),
        ((p.v_in, p.t_on, p.t_p) for p in curve.points),
    )


def fit_to_json(fit: HardSigmoidFit, path) -> None:
    fileio.write_json(path, dataclasses.asdict(fit))
