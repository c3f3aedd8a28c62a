"""Linear quantum filtering and cheap-control cooling of an optomechanical
oscillator probed through an entangled homodyne network."""

from .gaussian import (
    NoiseBlock,
    NoiseCorrelation,
    SystemModel,
    UnphysicalNoiseError,
    noise_block_from_NM,
    squeezed_theta,
    symplectic,
    validate_system,
)
from .kalman import (
    CovarianceMatrix,
    DegenerateMeasurementError,
    FilterGain,
    UnstableSystemError,
    kalman_gain,
    riccati_rhs,
    stationary_covariance,
    unconditional_covariance,
)
from .lqg import CostWeights, cheap_bound, e_min, solve_lqg
from .network import NetworkConfig, assemble_network
from .oscillator import DEFAULT_PARAMS, OscillatorParams, build_system
from .riccati import ConvergenceError, RiccatiOptions
from .sweep import SweepSpec, optimize_phases, run_sweep

__all__ = [
    "NoiseBlock",
    "NoiseCorrelation",
    "SystemModel",
    "UnphysicalNoiseError",
    "noise_block_from_NM",
    "squeezed_theta",
    "symplectic",
    "validate_system",
    "CovarianceMatrix",
    "DegenerateMeasurementError",
    "FilterGain",
    "UnstableSystemError",
    "kalman_gain",
    "riccati_rhs",
    "stationary_covariance",
    "unconditional_covariance",
    "CostWeights",
    "cheap_bound",
    "e_min",
    "solve_lqg",
    "NetworkConfig",
    "assemble_network",
    "DEFAULT_PARAMS",
    "OscillatorParams",
    "build_system",
    "ConvergenceError",
    "RiccatiOptions",
    "SweepSpec",
    "optimize_phases",
    "run_sweep",
]
