"""Fit threshold-charge parameters from measured latch times.

Timing data only constrain the ratios qth_slope/i_dn and qth_offset/i_dn
(the injection current never appears separately in t_on), so the fitters
work in those reduced units; absolute_coefficients() scales back once the
injection current is known. Two models:

  linear  t_on = a*v + b                     (no leakage)
  leaky   t_on = -tau*ln(1 - (a*v + b)/tau)  (leak time tau)

The leaky fit linearizes each candidate tau via u = tau*(1 - exp(-t/tau)),
which is exactly a*v + b under the model, solves the inner least squares
in closed form, and picks tau by residual sum of squares in t-space
(comparable across tau, unlike u-space).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import fileio

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_DEFAULT_TAU_GRID = tuple(10.0 ** np.arange(-6.0, 1.5, 0.5)) + (math.inf,)


@dataclass(frozen=True)
class TonDataset:
    """Measured (input voltage, latch time) pairs plus bias metadata."""

    v_in: np.ndarray           # V
    t_on: np.ndarray           # s
    v_g1: float | None = None  # V, clock high level during measurement
    v_a: float | None = None   # V
    f_clk: float | None = None # Hz

    def __post_init__(self):
        v = np.asarray(self.v_in, dtype=float).ravel()
        t = np.asarray(self.t_on, dtype=float).ravel()
        if v.size != t.size or v.size == 0:
            raise ValueError("v_in and t_on must be nonempty and equal length")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(t))):
            raise ValueError("dataset must be finite")
        if np.any(t < 0):
            raise ValueError("latch times must be >= 0")
        object.__setattr__(self, "v_in", v)
        object.__setattr__(self, "t_on", t)

    @property
    def n(self) -> int:
        return int(self.v_in.size)

    def n_distinct(self) -> int:
        return int(np.unique(self.v_in).size)

    @classmethod
    def from_csv(cls, path) -> "TonDataset":
        """Load v_in_V,t_on_s rows; rows with a non-finite latch time are dropped."""
        header, rows = fileio.read_csv(path)
        if header[:2] != ["v_in_V", "t_on_s"]:
            raise ValueError(f"{path}: expected header v_in_V,t_on_s, got {header!r}")
        v = np.array([r[0] for r in rows])
        t = np.array([r[1] for r in rows])
        keep = np.isfinite(t)
        if not np.any(keep):
            raise ValueError(f"{path}: no finite latch times")
        return cls(v_in=v[keep], t_on=t[keep])

    def to_csv(self, path) -> None:
        fileio.write_csv(path, ("v_in_V", "t_on_s"), zip(self.v_in, self.t_on))


@dataclass(frozen=True)
class FitReport:
    model: str                    # "linear" or "leaky"
    qth_slope_over_idn: float     # s/V  (= qth_slope / i_dn)
    qth_offset_over_idn: float    # s    (= qth_offset / i_dn)
    tau_leak_est: float           # s, inf for the linear model
    r_squared: float
    residuals: tuple[float, ...]  # s, t_on - predicted, in dataset order
    rss: float                    # s^2, residual sum of squares (t-space)
    n_points: int

    def predict(self, v):
        """Model latch time; inf where the leaky model never latches."""
        v = np.asarray(v, dtype=float)
        q_over_i = self.qth_slope_over_idn * v + self.qth_offset_over_idn
        if math.isinf(self.tau_leak_est):
            return q_over_i
        arg = q_over_i / self.tau_leak_est
        with np.errstate(invalid="ignore", divide="ignore"):
            t = -self.tau_leak_est * np.log1p(-arg)
        return np.where(arg < 1.0, t, np.inf)

    def absolute_coefficients(self, i_dn: float) -> tuple[float, float]:
        """(qth_slope, qth_offset) in C/V and C, given the injection current."""
        if not (i_dn > 0):
            raise ValueError("i_dn must be > 0")
        return self.qth_slope_over_idn * i_dn, self.qth_offset_over_idn * i_dn

    def to_json(self, path) -> None:
        fileio.write_json(path, dataclasses.asdict(self))


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Closed-form least squares y ~ slope*x + intercept."""
    xm, ym = x.mean(), y.mean()
    s_xx = float(np.sum((x - xm) ** 2))
    if s_xx == 0.0:
        raise ValueError("all input voltages identical; slope not identifiable")
    slope = float(np.sum((x - xm) * (y - ym)) / s_xx)
    return slope, float(ym - slope * xm)


def _r_squared(t: np.ndarray, t_hat: np.ndarray) -> float:
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    ss_res = float(np.sum((t - t_hat) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)


def _report(model: str, ds: TonDataset, slope: float, intercept: float,
            tau: float, t_hat: np.ndarray) -> FitReport:
    resid = ds.t_on - t_hat
    return FitReport(
        model=model,
        qth_slope_over_idn=slope,
        qth_offset_over_idn=intercept,
        tau_leak_est=float(tau),
        r_squared=_r_squared(ds.t_on, t_hat),
        residuals=tuple(float(r) for r in resid),
        rss=float(np.sum(resid**2)),
        n_points=ds.n,
    )


def fit_linear(ds: TonDataset) -> FitReport:
    """Least-squares line t_on ~ v_in (leak-free model).

    Needs at least 2 distinct input voltages.
    """
    if ds.n_distinct() < 2:
        raise ValueError("need at least 2 distinct v_in values")
    slope, intercept = _ols(ds.v_in, ds.t_on)
    return _report("linear", ds, slope, intercept, math.inf,
                   slope * ds.v_in + intercept)


def _leaky_rss(ds: TonDataset, tau: float) -> tuple[float, float, float]:
    """(rss, slope, intercept) of the inner fit at fixed tau."""
    if math.isinf(tau):
        u = ds.t_on
    else:
        u = -tau * np.expm1(-ds.t_on / tau)
    slope, intercept = _ols(ds.v_in, u)
    q_over_i = slope * ds.v_in + intercept
    if math.isinf(tau):
        t_hat = q_over_i
    else:
        arg = q_over_i / tau
        if np.any(arg >= 1.0):
            return math.inf, slope, intercept
        t_hat = -tau * np.log1p(-arg)
    return float(np.sum((ds.t_on - t_hat) ** 2)), slope, intercept


def fit_leaky(ds: TonDataset, tau_grid=None) -> FitReport:
    """Fit the leaky model, scanning tau over a grid then refining.

    Needs at least 3 distinct input voltages. The grid defaults to
    half-decade steps from 1 us to 10 s plus inf (the linear limit). The
    best finite grid point is refined by golden-section search on
    log10(tau) between its neighbors (extending one decade past a grid
    edge); if inf wins outright the result degenerates to the linear fit
    (tau_leak_est=inf). Raises if no candidate admits a valid transform
    (predicted latch time diverges on some point for every tau).
    """
    if ds.n_distinct() < 3:
        raise ValueError("need at least 3 distinct v_in values")
    grid = _DEFAULT_TAU_GRID if tau_grid is None else tuple(tau_grid)
    if len(grid) == 0 or any(not (g > 0) for g in grid):
        raise ValueError("tau_grid must be nonempty with positive entries")
    grid = tuple(sorted(set(grid)))

    scores = [_leaky_rss(ds, tau)[0] for tau in grid]
    best = int(np.argmin(scores))
    if math.isinf(scores[best]):
        raise ValueError("no tau candidate admits a valid transform")
    tau_best = grid[best]

    if math.isfinite(tau_best):
        lo = grid[best - 1] if best > 0 else tau_best / 10.0
        hi = grid[best + 1] if best + 1 < len(grid) else tau_best * 10.0
        if math.isinf(hi):
            hi = tau_best * 10.0
        a, b = math.log10(lo), math.log10(hi)
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        fc = _leaky_rss(ds, 10.0**c)[0]
        fd = _leaky_rss(ds, 10.0**d)[0]
        while b - a > 1e-6:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - _GOLDEN * (b - a)
                fc = _leaky_rss(ds, 10.0**c)[0]
            else:
                a, c, fc = c, d, fd
                d = a + _GOLDEN * (b - a)
                fd = _leaky_rss(ds, 10.0**d)[0]
        tau_ref = 10.0 ** (0.5 * (a + b))
        if _leaky_rss(ds, tau_ref)[0] < scores[best]:
            tau_best = tau_ref

    rss, slope, intercept = _leaky_rss(ds, tau_best)
    if math.isinf(tau_best):
        t_hat = slope * ds.v_in + intercept
    else:
        t_hat = -tau_best * np.log1p(-(slope * ds.v_in + intercept) / tau_best)
    return _report("leaky", ds, slope, intercept, tau_best, t_hat)
