"""Behavioral simulator for a positive-feedback device operated as a PWM neuron.

A charge-integrating latch device encodes an input voltage as the pulse
width remaining in a clock cycle, realizing a hard-sigmoid activation;
includes a sawtooth-comparator reference circuit, a crossbar MAC demo, a
calibration fitter, and a deterministic experiment CLI.
"""

from .calibration import FitReport, TonDataset, fit_leaky, fit_linear
from .config import ConfigError, ExperimentConfig, load_config, validate_config
from .crossbar import InferenceResult, PwmVector, SynapseArray, infer, mac_pam, mac_pwm
from .device import (
    BiasPoint,
    DcTransferCurve,
    PfDeviceParams,
    PfDeviceState,
    ValidityWarning,
    anode_current,
    dc_transfer_sweep,
    injection_current,
    on_state_current,
    reset,
    step,
    threshold_charge,
)
from .experiments import emit_figure_data, run_experiment
from .neuron import (
    ActivationCurve,
    ActivationPoint,
    HardSigmoidFit,
    activation_curve,
    encode,
    fit_hard_sigmoid,
)
from .refcircuit import SawtoothSpec, encode_ref, match_pf_params, v_saw
from .transient import (
    ClockSpec,
    PiecewiseConstant,
    SimConfig,
    Stimulus,
    TurnOnEvent,
    Waveform,
    extract_t_on,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "ActivationCurve", "ActivationPoint", "BiasPoint", "ClockSpec",
    "ConfigError", "DcTransferCurve", "ExperimentConfig", "FitReport",
    "HardSigmoidFit", "InferenceResult", "PfDeviceParams", "PfDeviceState",
    "PiecewiseConstant", "PwmVector", "SawtoothSpec", "SimConfig",
    "Stimulus", "SynapseArray", "TonDataset", "TurnOnEvent",
    "ValidityWarning", "Waveform", "activation_curve", "anode_current",
    "dc_transfer_sweep", "emit_figure_data", "encode", "encode_ref",
    "extract_t_on", "fit_hard_sigmoid", "fit_leaky", "fit_linear", "infer",
    "injection_current", "load_config", "mac_pam", "mac_pwm",
    "match_pf_params", "on_state_current", "reset", "run_experiment",
    "simulate", "step", "threshold_charge", "v_saw", "validate_config",
]
