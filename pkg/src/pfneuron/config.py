"""Experiment configuration: flat key=value text with dotted section prefixes.

Example:

    experiment = activation
    seed = 7
    device.qth_slope = 1e-14
    clock.f_clk = 1000
    sim.dt = 1e-6
    activation.v_start = 0.5
    activation.v_stop = 2.0
    activation.points = 16

Values are SI-unit numbers (no unit suffixes), paths, or comma-separated
lists. Unknown keys are rejected; keys belonging to a different
experiment's section are ignored so one file can be switched between
kinds by editing the experiment line.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .device import PfDeviceParams
from .transient import ClockSpec, PiecewiseConstant, SimConfig

EXPERIMENT_KINDS = (
    "iv-sweep", "transient", "activation", "compare-ref", "calibrate", "infer",
)


class ConfigError(Exception):
    """Malformed or invalid experiment configuration."""


@dataclass(frozen=True)
class IvSweepSpec:
    v_g2: tuple[float, ...] = (0.5, 1.0, 1.5, 2.0)  # V
    v_g1_start: float = 0.0     # V
    v_g1_stop: float = 0.8      # V
    v_g1_points: int = 161
    v_a: float = 1.0            # V
    v_c: float = 0.0            # V


@dataclass(frozen=True)
class TransientSpec:
    v_g2: float | PiecewiseConstant = 1.0  # V
    n_cycles: int = 1
    v_a: float = 1.0            # V
    v_c: float = 0.0            # V


@dataclass(frozen=True)
class ActivationSpec:
    v_start: float = 0.5        # V
    v_stop: float = 2.0         # V
    points: int = 16
    v_a: float = 1.0            # V
    v_c: float = 0.0            # V


@dataclass(frozen=True)
class CompareRefSpec:
    i_pullup: float = 1e-6      # A
    c_saw: float = 1e-9         # F
    v_dd: float = 1.2           # V
    v_start: float = 0.0        # V
    v_stop: float = 1.5         # V
    points: int = 151


@dataclass(frozen=True)
class CalibrateSpec:
    input: str | None = None    # CSV path; None -> synthesize from the model
    model: str = "both"         # linear | leaky | both
    v_start: float = 0.5        # V, synthetic grid
    v_stop: float = 2.0         # V
    points: int = 32
    noise: float = 0.0          # multiplicative noise fraction on synthetic t_on


@dataclass(frozen=True)
class InferSpec:
    weights: tuple[str, ...] = ()       # CSV matrix paths; empty -> synthetic
    v_in: tuple[float, ...] = ()        # V; empty -> seeded random in range
    v_lo: float = 0.5                   # V, interlayer input range
    v_hi: float = 2.0                   # V
    v_read: float = 0.2                 # V, crossbar read amplitude
    n_in: int = 8                       # synthetic-instance shape
    n_out: int = 4
    n_layers: int = 2
    nonlinearity: tuple[float, ...] = ()  # poly coeffs for the PAM comparison


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    device: PfDeviceParams
    clock: ClockSpec
    sim: SimConfig
    spec: object                # the kind-specific block
    raw: dict = field(default_factory=dict)  # parsed key=value pairs, echoed in summaries


def parse_kv(text: str) -> dict[str, str]:
    """Parse flat key=value lines; '#' starts a comment, blanks are skipped."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _float(key: str, s: str) -> float:
    try:
        x = float(s)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {s!r}") from None
    if math.isnan(x):
        raise ConfigError(f"{key}: nan is not allowed")
    return x


def _int(key: str, s: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {s!r}") from None


def _float_list(key: str, s: str) -> tuple[float, ...]:
    return tuple(_float(key, part.strip()) for part in s.split(",") if part.strip())


def _str_list(s: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in s.split(",") if part.strip())


def _v_g2_signal(key: str, s: str) -> float | PiecewiseConstant:
    """A bare number, or comma-separated t:v breakpoints for a stepped input."""
    if ":" not in s:
        return _float(key, s)
    times, values = [], []
    for part in s.split(","):
        part = part.strip()
        if part.count(":") != 1:
            raise ConfigError(f"{key}: expected t:v pairs, got {part!r}")
        t_s, v_s = part.split(":")
        times.append(_float(key, t_s))
        values.append(_float(key, v_s))
    try:
        return PiecewiseConstant(times=tuple(times), values=tuple(values))
    except ValueError as e:
        raise ConfigError(f"{key}: {e}") from None


# field name -> (parser tag) per section; tags: f=float, i=int, fl=float list,
# s=string, sl=string list, vg2=number-or-breakpoints
_SCHEMA: dict[str, dict[str, str]] = {
    "": {"experiment": "s", "seed": "i"},
    "device": {
        "qth_slope": "f", "qth_offset": "f",
        "vg2_valid_lo": "f", "vg2_valid_hi": "f",
        "inj_i0": "f", "inj_vref": "f", "inj_ss": "f",
        "tau_leak": "f", "i_off": "f",
        "diode_is": "f", "diode_n": "f", "thermal_v": "f",
    },
    "clock": {"f_clk": "f", "v_high": "f", "v_low": "f", "duty": "f"},
    "sim": {"dt": "f", "t_tol": "f", "sample_stride": "i", "i_compliance": "f"},
    "iv-sweep": {
        "v_g2": "fl", "v_g1_start": "f", "v_g1_stop": "f",
        "v_g1_points": "i", "v_a": "f", "v_c": "f",
    },
    "transient": {"v_g2": "vg2", "n_cycles": "i", "v_a": "f", "v_c": "f"},
    "activation": {
        "v_start": "f", "v_stop": "f", "points": "i", "v_a": "f", "v_c": "f",
    },
    "compare-ref": {
        "i_pullup": "f", "c_saw": "f", "v_dd": "f",
        "v_start": "f", "v_stop": "f", "points": "i",
    },
    "calibrate": {
        "input": "s", "model": "s", "v_start": "f", "v_stop": "f",
        "points": "i", "noise": "f",
    },
    "infer": {
        "weights": "sl", "v_in": "fl", "v_lo": "f", "v_hi": "f",
        "v_read": "f", "n_in": "i", "n_out": "i", "n_layers": "i",
        "nonlinearity": "fl",
    },
}

_PARSERS = {
    "f": _float, "i": _int, "fl": _float_list,
    "s": lambda _k, s: s, "sl": lambda _k, s: _str_list(s), "vg2": _v_g2_signal,
}


def _split_key(key: str) -> tuple[str, str]:
    if "." in key:
        section, name = key.split(".", 1)
    else:
        section, name = "", key
    if section not in _SCHEMA or name not in _SCHEMA[section]:
        raise ConfigError(f"unknown key: {key!r}")
    return section, name


def _section_values(raw: dict[str, str], section: str) -> dict:
    values = {}
    for key, text in raw.items():
        sec, name = _split_key(key)
        if sec == section:
            values[name] = _PARSERS[_SCHEMA[sec][name]](key, text)
    return values


def _build(cls, values: dict, label: str):
    try:
        return cls(**values)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"{label}: {e}") from None


def _validate_grid(label: str, start: float, stop: float, points: int) -> None:
    if points < 1:
        raise ConfigError(f"{label}: empty sweep grid (points = {points})")
    if points > 1 and not (stop > start):
        raise ConfigError(f"{label}: stop must exceed start for a multi-point grid")


def load_config(path) -> ExperimentConfig:
    """Read, parse, and validate a config file into typed blocks.

    Raises ConfigError for schema/validation problems; OSError propagates
    for unreadable files.
    """
    text = Path(path).read_text(encoding="utf-8")
    return validate_config(parse_kv(text))


def validate_config(raw: dict[str, str]) -> ExperimentConfig:
    for key in raw:
        _split_key(key)

    top = _section_values(raw, "")
    kind = top.get("experiment")
    if kind is None:
        raise ConfigError("missing required key: experiment")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(
            f"experiment must be one of {', '.join(EXPERIMENT_KINDS)}; got {kind!r}"
        )
    seed = top.get("seed", 0)
    if seed < 0:
        raise ConfigError("seed must be >= 0")

    dev_values = _section_values(raw, "device")
    lo = dev_values.pop("vg2_valid_lo", None)
    hi = dev_values.pop("vg2_valid_hi", None)
    if (lo is None) != (hi is None):
        raise ConfigError("vg2_valid_lo and vg2_valid_hi must be given together")
    if lo is not None:
        dev_values["vg2_valid"] = (lo, hi)
    device = _build(PfDeviceParams, dev_values, "device")
    clock = _build(ClockSpec, _section_values(raw, "clock"), "clock")
    sim = _build(SimConfig, _section_values(raw, "sim"), "sim")
    if sim.dt > clock.period / 100.0:
        raise ConfigError("sim.dt must be <= clock period / 100")

    values = _section_values(raw, kind)
    if kind == "iv-sweep":
        spec = _build(IvSweepSpec, values, kind)
        if len(spec.v_g2) == 0:
            raise ConfigError("iv-sweep.v_g2: empty sweep grid")
        _validate_grid("iv-sweep.v_g1", spec.v_g1_start, spec.v_g1_stop, spec.v_g1_points)
        if not math.isfinite(device.tau_leak):
            raise ConfigError("iv-sweep requires a finite device.tau_leak")
    elif kind == "transient":
        spec = _build(TransientSpec, values, kind)
        if spec.n_cycles < 1:
            raise ConfigError("transient.n_cycles must be >= 1")
    elif kind == "activation":
        spec = _build(ActivationSpec, values, kind)
        _validate_grid("activation", spec.v_start, spec.v_stop, spec.points)
    elif kind == "compare-ref":
        spec = _build(CompareRefSpec, values, kind)
        _validate_grid("compare-ref", spec.v_start, spec.v_stop, spec.points)
        for name in ("i_pullup", "c_saw", "v_dd"):
            if not (getattr(spec, name) > 0):
                raise ConfigError(f"compare-ref.{name} must be > 0")
        if spec.v_start < 0:
            raise ConfigError("compare-ref.v_start must be >= 0")
        if clock.duty != 1.0:
            raise ConfigError(
                "compare-ref requires clock.duty = 1 (the reference ramp spans the full period)"
            )
    elif kind == "calibrate":
        spec = _build(CalibrateSpec, values, kind)
        if spec.model not in ("linear", "leaky", "both"):
            raise ConfigError("calibrate.model must be linear, leaky, or both")
        if spec.input is None:
            _validate_grid("calibrate", spec.v_start, spec.v_stop, spec.points)
        if spec.noise < 0:
            raise ConfigError("calibrate.noise must be >= 0")
    else:
        spec = _build(InferSpec, values, kind)
        if not (spec.v_hi > spec.v_lo):
            raise ConfigError("infer.v_hi must exceed infer.v_lo")
        if not (spec.v_read > 0):
            raise ConfigError("infer.v_read must be > 0")
        if not spec.weights:
            if spec.n_in < 1 or spec.n_out < 1 or spec.n_layers < 1:
                raise ConfigError("infer synthetic shape values must be >= 1")

    return ExperimentConfig(
        experiment=kind, seed=seed, device=device, clock=clock, sim=sim,
        spec=spec, raw=dict(raw),
    )


def config_echo(cfg: ExperimentConfig) -> dict:
    """Full effective configuration (defaults included) for summary files."""
    spec_fields = dataclasses.asdict(cfg.spec)
    if isinstance(cfg.spec, TransientSpec) and isinstance(spec_fields.get("v_g2"), dict):
        pw = cfg.spec.v_g2
        spec_fields["v_g2"] = {"times": list(pw.times), "values": list(pw.values)}
    return {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "device": dataclasses.asdict(cfg.device),
        "clock": dataclasses.asdict(cfg.clock),
        "sim": dataclasses.asdict(cfg.sim),
        cfg.experiment: spec_fields,
    }
