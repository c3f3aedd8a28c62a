"""Mechanical oscillator dispersively coupled to a driven cavity.

Modes are ordered (oscillator, cavity). The cavity leaks into the input
network at rate ``kappa``; the oscillator sees a thermal bath.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import SystemModel
from .network import CouplingMatrix, NetworkConfig, assemble_network


@dataclass(frozen=True)
class OscillatorParams:
    """Model parameters in units of the oscillator frequency.

    ``bath_diffusion_scale`` multiplies the thermal diffusion
    ``gamma (2 nbar + 1) Q``. The default 1.0 keeps that term as written;
    0.5 is the value consistent with the drift ``-gamma Q / 2`` relaxing the
    oscillator to its thermal variance ``nbar + 1/2``.
    """

    omega: float = 1.0
    delta_detuning: float = 1.0
    lam: float = 0.3
    kappa: float = 4.0
    gamma: float = 1e-7
    nbar: float = 1e5
    bath_diffusion_scale: float = 1.0

    def __post_init__(self):
        for name in ("kappa", "gamma", "nbar", "bath_diffusion_scale"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


DEFAULT_PARAMS = OscillatorParams()


def energy_weight() -> np.ndarray:
    """Weight selecting the oscillator quadratures, ``diag(1, 1, 0, 0)``."""
    return np.diag([1.0, 1.0, 0.0, 0.0])


def build_G(params: OscillatorParams) -> np.ndarray:
    w, lam, d = params.omega, params.lam, params.delta_detuning
    return np.array(
        [
            [w, 0.0, -lam, 0.0],
            [0.0, w, 0.0, 0.0],
            [-lam, 0.0, d, 0.0],
            [0.0, 0.0, 0.0, d],
        ]
    )


def build_coupling(params: OscillatorParams) -> CouplingMatrix:
    """Cavity decay ``L = sqrt(kappa) a2``, i.e. ``c = sqrt(kappa/2) [0, 0, 1, i]``."""
    if params.kappa < 0:
        raise ValueError("kappa must be non-negative")
    return CouplingMatrix.from_vector(np.sqrt(params.kappa / 2.0) * np.array([0, 0, 1, 1j]))


def apply_thermal_bath(sys: SystemModel, params: OscillatorParams) -> SystemModel:
    if sys.n != 2:
        raise ValueError("thermal bath is defined for the two-mode oscillator model")
    if params.gamma == 0:
        return sys
    q = energy_weight()
    return sys.replace(
        extra_drift=-(params.gamma / 2.0) * q,
        extra_diffusion=params.bath_diffusion_scale * params.gamma * (2.0 * params.nbar + 1.0) * q,
    )


def default_actuation() -> np.ndarray:
    """Direct drive of both oscillator quadratures."""
    return np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]])


def build_system(
    cfg: NetworkConfig,
    params: OscillatorParams = DEFAULT_PARAMS,
    F: np.ndarray | None = None,
    bath: bool = True,
) -> SystemModel:
    """Oscillator-cavity model wired into the input network."""
    F = default_actuation() if F is None else F
    sys = assemble_network(cfg, build_coupling(params), build_G(params), F)
    return apply_thermal_bath(sys, params) if bath else sys


def controllability_rank(a: np.ndarray, b: np.ndarray) -> int:
    dim = a.shape[0]
    blocks = [b]
    for _ in range(dim - 1):
        blocks.append(a @ blocks[-1])
    return int(np.linalg.matrix_rank(np.hstack(blocks)))
