"""Optical input network: entangling splitter, output loss, recombination and
two homodyne detectors.

Channel order is (squeezed field, coherent field, loss vacuum). The system
couples to the first output arm of the entangling splitter; the second arm
bypasses the system and is recombined with the lossy system output before
detection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import (
    SIGMA,
    NoiseCorrelation,
    SystemModel,
    sigma_matrix,
    squeezed_theta,
    vacuum_block,
    validate_system,
)

_I2 = np.eye(2)
_O2 = np.zeros((2, 2))


def _check_unit(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class NetworkConfig:
    """Network knobs. Reflectivities are stored squared."""

    beta1_sq: float
    beta2_sq: float = 0.0
    delta_sq: float = 0.0
    theta1: float = 0.0
    theta2: float = 0.0
    r: float = 2.3

    def __post_init__(self):
        for name in ("beta1_sq", "beta2_sq", "delta_sq"):
            _check_unit(name, getattr(self, name))

    @property
    def alpha1(self) -> float:
        return float(np.sqrt(1.0 - self.beta1_sq))

    @property
    def beta1(self) -> float:
        return float(np.sqrt(self.beta1_sq))

    def with_phases(self, theta1: float, theta2: float) -> "NetworkConfig":
        return NetworkConfig(
            self.beta1_sq, self.beta2_sq, self.delta_sq, theta1, theta2, self.r
        )


@dataclass(frozen=True)
class CouplingMatrix:
    cbar: np.ndarray
    c: np.ndarray

    @classmethod
    def from_vector(cls, c) -> "CouplingMatrix":
        c = np.asarray(c, dtype=complex)
        cbar = np.sqrt(2.0) * np.vstack([c.real, c.imag])
        return cls(cbar, c)

    @property
    def n(self) -> int:
        return self.cbar.shape[1] // 2


def beam_splitter(beta_sq: float) -> np.ndarray:
    beta_sq = _check_unit("beta_sq", beta_sq)
    b = np.sqrt(beta_sq)
    a = np.sqrt(1.0 - beta_sq)
    return np.block(
        [
            [a * _I2, b * _I2, _O2],
            [-b * _I2, a * _I2, _O2],
            [_O2, _O2, _I2],
        ]
    )


def loss_stage(delta_sq: float) -> np.ndarray:
    delta_sq = _check_unit("delta_sq", delta_sq)
    d = np.sqrt(delta_sq)
    a = np.sqrt(1.0 - delta_sq)
    return np.block(
        [
            [a * _I2, _O2, d * _I2],
            [_O2, _I2, _O2],
            [-d * _I2, _O2, a * _I2],
        ]
    )


def homodyne_selectors(theta1: float, theta2: float) -> np.ndarray:
    sel = np.zeros((2, 6))
    sel[0, :2] = np.cos(theta1), np.sin(theta1)
    sel[1, 2:4] = np.cos(theta2), np.sin(theta2)
    return sel


def network_scattering(cfg: NetworkConfig) -> np.ndarray:
    """Total field transformation BS2 . loss . BS1."""
    return beam_splitter(cfg.beta2_sq) @ loss_stage(cfg.delta_sq) @ beam_splitter(cfg.beta1_sq)


def measurement_matrix(cfg: NetworkConfig) -> np.ndarray:
    return homodyne_selectors(cfg.theta1, cfg.theta2) @ network_scattering(cfg)


def input_matrix(cfg: NetworkConfig, coupling: CouplingMatrix) -> np.ndarray:
    """B for a system driven by the first arm of the entangling splitter."""
    n = coupling.n
    arm = sigma_matrix(n) @ coupling.cbar.T @ SIGMA
    return np.hstack([cfg.alpha1 * arm, cfg.beta1 * arm, np.zeros((2 * n, 2))])


def input_noise(r: float) -> NoiseCorrelation:
    return NoiseCorrelation.from_blocks([squeezed_theta(r), vacuum_block(), vacuum_block()])


def assemble_network(cfg: NetworkConfig, coupling: CouplingMatrix, G, F) -> SystemModel:
    G = np.asarray(G, dtype=float)
    if G.shape != (2 * coupling.n, 2 * coupling.n):
        raise ValueError(f"G shape {G.shape} does not match coupling with n={coupling.n}")
    sys = SystemModel.structured(
        G=G,
        B=input_matrix(cfg, coupling),
        D=measurement_matrix(cfg),
        F=np.asarray(F, dtype=float),
        noise=input_noise(cfg.r),
    )
    problems = validate_system(sys)
    if problems:
        raise RuntimeError("assembled network failed validation: " + "; ".join(problems))
    return sys


def rephase(sys: SystemModel, cfg: NetworkConfig) -> SystemModel:
    """Swap in new detector phases without revalidating.

    Only D and C depend on the phases, so this is the cheap path used by the
    phase search.
    """
    D = measurement_matrix(cfg)
    C = D @ sigma_matrix(sys.m) @ sys.B.T @ sigma_matrix(sys.n)
    return sys.replace(C=C, D=D)


__all__ = [
    "NetworkConfig",
    "CouplingMatrix",
    "beam_splitter",
    "loss_stage",
    "homodyne_selectors",
    "network_scattering",
    "measurement_matrix",
    "input_matrix",
    "input_noise",
    "assemble_network",
    "rephase",
]
