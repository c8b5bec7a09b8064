"""PWM-coded multiply-accumulate on a conductance crossbar.

Inputs coded as pulse widths at a fixed read amplitude accumulate charge
Q_j = sum_i g_ij * v_read * w_i — an exact dot product no matter how
nonlinear the synapse I-V is, because every device only ever sees v_read.
Amplitude-coded inputs on the same array pick up the I-V nonlinearity as a
multiplicative error term, which mac_pam models for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .device import PfDeviceParams
from .neuron import encode
from .transient import ClockSpec, SimConfig


@dataclass(frozen=True)
class SynapseArray:
    """Crossbar of conductances, rows = inputs, columns = outputs.

    The synapse I-V is i(v) = g * v * p(v), where p is the effective-
    conductance ratio G_eff(v)/G(v_read): None for an ideal resistor
    (p = 1), otherwise a polynomial given low-order-first and rescaled on
    construction so that p(v_read) = 1 exactly.
    """

    g: np.ndarray                                  # S, shape (n_in, n_out)
    v_read: float = 0.2                            # V, pulse amplitude
    nonlinearity: tuple[float, ...] | None = None  # polynomial coefficients

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if g.ndim != 2 or g.size == 0:
            raise ValueError("g must be a nonempty 2-D array")
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ValueError("conductances must be finite and >= 0")
        object.__setattr__(self, "g", g)
        if not (self.v_read > 0):
            raise ValueError("v_read must be > 0")
        if self.nonlinearity is not None:
            coeffs = tuple(float(c) for c in self.nonlinearity)
            if len(coeffs) == 0:
                raise ValueError("nonlinearity needs at least one coefficient")
            scale = float(np.polyval(coeffs[::-1], self.v_read))
            if scale == 0.0:
                raise ValueError("nonlinearity polynomial vanishes at v_read")
            object.__setattr__(
                self, "nonlinearity", tuple(c / scale for c in coeffs)
            )

    def p(self, v):
        """Nonlinearity factor; p(v_read) = 1 by construction."""
        v = np.asarray(v, dtype=float)
        if self.nonlinearity is None:
            return np.ones_like(v)
        return np.polyval(self.nonlinearity[::-1], v)

    @property
    def n_in(self) -> int:
        return self.g.shape[0]

    @property
    def n_out(self) -> int:
        return self.g.shape[1]


@dataclass(frozen=True)
class PwmVector:
    """Pulse-width-coded input vector; all widths lie in [0, t_max]."""

    widths: tuple[float, ...]   # s
    t_max: float                # s

    def __post_init__(self):
        if not (self.t_max > 0):
            raise ValueError("t_max must be > 0")
        if len(self.widths) == 0:
            raise ValueError("widths must be nonempty")
        for w in self.widths:
            if not (0.0 <= w <= self.t_max):
                raise ValueError("widths must lie in [0, t_max]")


def mac_pwm(arr: SynapseArray, x: PwmVector) -> np.ndarray:
    """Column charges Q_j = sum_i g_ij * v_read * widths_i (C).

    Exact regardless of the nonlinearity: constant amplitude means the
    factor p(v_read) = 1 everywhere.
    """
    if len(x.widths) != arr.n_in:
        raise ValueError(f"width count {len(x.widths)} != array inputs {arr.n_in}")
    w = np.asarray(x.widths, dtype=float)
    return arr.g.T @ (arr.v_read * w)


def mac_pam(arr: SynapseArray, v) -> np.ndarray:
    """Column currents for amplitude-coded inputs: I_j = sum_i g_ij * v_i * p(v_i) (A)."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size != arr.n_in:
        raise ValueError(f"input count {v.size} != array inputs {arr.n_in}")
    if not np.all(np.isfinite(v)):
        raise ValueError("inputs must be finite")
    return arr.g.T @ (v * arr.p(v))


@dataclass(frozen=True)
class InferenceResult:
    layer_inputs: tuple[tuple[float, ...], ...]    # V, per-layer input voltages
    layer_widths: tuple[tuple[float, ...], ...]    # s, encoded pulse widths per layer
    layer_charges: tuple[tuple[float, ...], ...]   # C, column charges per layer
    interlayer_maps: tuple[tuple[float, float], ...]  # (gain V/C, offset V) between layers
    outputs: tuple[float, ...]                     # C, final-layer charges

    @property
    def predicted(self) -> int:
        """Index of the largest final charge."""
        return int(np.argmax(self.outputs))


def infer(
    layers: list[SynapseArray],
    v_in,
    params: PfDeviceParams,
    clock: ClockSpec,
    cfg: SimConfig,
    v_in_range: tuple[float, float] = (0.5, 2.0),
) -> InferenceResult:
    """Run a layered PWM MAC: encode each voltage with the neuron, accumulate
    charge on the crossbar, then map the charge span onto the next layer's
    input range.

    The interlayer map is the affine rescaling sending [min Q, max Q] onto
    v_in_range (so mapped voltages are clamped to that range by
    construction); a layer whose outputs are all equal has no usable span
    and raises ValueError.
    """
    if not layers:
        raise ValueError("layers must be nonempty")
    lo, hi = v_in_range
    if not (hi > lo):
        raise ValueError("v_in_range must have hi > lo")
    v = np.asarray(v_in, dtype=float).ravel()
    for a, b in zip(layers, layers[1:]):
        if a.n_out != b.n_in:
            raise ValueError("adjacent layers have mismatched shapes")

    t_max = clock.high_time
    inputs_rec, widths_rec, charges_rec, maps_rec = [], [], [], []
    for li, arr in enumerate(layers):
        if v.size != arr.n_in:
            raise ValueError(f"layer {li}: input size {v.size} != {arr.n_in}")
        widths = np.array([encode(params, float(x), clock, cfg)[1] for x in v])
        q = mac_pwm(arr, PwmVector(widths=tuple(float(w) for w in widths), t_max=t_max))
        inputs_rec.append(tuple(float(x) for x in v))
        widths_rec.append(tuple(float(w) for w in widths))
        charges_rec.append(tuple(float(c) for c in q))
        if li < len(layers) - 1:
            span = float(q.max() - q.min())
            if span == 0.0:
                raise ValueError(f"layer {li}: zero charge span, cannot rescale")
            gain = (hi - lo) / span
            offset = lo - gain * float(q.min())
            maps_rec.append((gain, offset))
            v = gain * q + offset

    return InferenceResult(
        layer_inputs=tuple(inputs_rec),
        layer_widths=tuple(widths_rec),
        layer_charges=tuple(charges_rec),
        interlayer_maps=tuple(maps_rec),
        outputs=charges_rec[-1],
    )
