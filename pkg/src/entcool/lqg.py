"""Stationary LQG control: control Riccati, feedback gain, minimum cost and
the cheap-control bound."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import SystemModel
from .kalman import CovarianceMatrix, kalman_gain, stationary_covariance
from .riccati import ConvergenceError, RiccatiOptions, maxabs, solve_stationary, sym


@dataclass(frozen=True)
class CostWeights:
    q: np.ndarray
    rmat: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        rmat = np.atleast_2d(np.asarray(self.rmat, dtype=float))
        if maxabs(q - q.T) > 1e-12 or np.linalg.eigvalsh(q).min() < -1e-12:
            raise ValueError("q must be symmetric positive semidefinite")
        if maxabs(rmat - rmat.T) > 1e-12 or np.linalg.eigvalsh(rmat).min() <= 0:
            raise ValueError("rmat must be symmetric positive definite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "rmat", rmat)

    @classmethod
    def scaled(cls, q, rho: float, k: int) -> "CostWeights":
        return cls(q, rho * np.eye(k))


@dataclass(frozen=True)
class ControlSolution:
    p_inf: np.ndarray
    gain: np.ndarray
    j_min: float
    j_cheap: float
    residual: float


def control_residual(p, sys: SystemModel, w: CostWeights) -> np.ndarray:
    a, f = sys.drift, sys.F
    return sym(p @ a + a.T @ p - p @ f @ np.linalg.solve(w.rmat, f.T) @ p + w.q)


def control_riccati_stationary(
    sys: SystemModel, w: CostWeights, opts: RiccatiOptions | None = None
) -> np.ndarray:
    """Stationary ``P`` of the control Riccati equation.

    With ``method="ode"`` the differential form is integrated backward from
    a zero terminal condition.
    """
    opts = opts or RiccatiOptions()
    sol = solve_stationary(sys.drift, sys.F, w.q, w.rmat, opts)
    p = sym(sol.x)
    res = maxabs(control_residual(p, sys, w))
    if not res <= opts.tol:
        raise ConvergenceError(
            f"control Riccati residual {res:.3g} exceeds {opts.tol:.3g}", sol.history
        )
    return p


def optimal_gain(p_inf, sys: SystemModel, w: CostWeights) -> np.ndarray:
    """Feedback ``u = gain @ pi(x)`` with ``gain = -R^-1 F^T P``."""
    return -np.linalg.solve(w.rmat, sys.F.T @ p_inf)


def cheap_bound(v_inf, q) -> float:
    v = v_inf.v if isinstance(v_inf, CovarianceMatrix) else np.asarray(v_inf)
    return float(np.trace(np.asarray(q) @ v))


def lqg_min_cost(sys: SystemModel, w: CostWeights, v_inf, p_inf) -> float:
    k = kalman_gain(v_inf, sys).k
    first = np.trace(k @ sys.innovation_cov @ k.T @ p_inf)
    return float(first) + cheap_bound(v_inf, w.q)


def e_min(v_inf, q=None) -> float:
    """Oscillator excitation number reachable by cheap control.

    ``(Tr(Q V) - 1) / 2`` with ``Q`` the oscillator selector by default.
    """
    v = v_inf.v if isinstance(v_inf, CovarianceMatrix) else np.asarray(v_inf)
    if q is None:
        return float((v[0, 0] + v[1, 1] - 1.0) / 2.0)
    return (cheap_bound(v, q) - 1.0) / 2.0


def solve_lqg(
    sys: SystemModel,
    w: CostWeights,
    v_inf: CovarianceMatrix | None = None,
    opts: RiccatiOptions | None = None,
) -> ControlSolution:
    v_inf = v_inf if v_inf is not None else stationary_covariance(sys, opts)
    p = control_riccati_stationary(sys, w, opts)
    return ControlSolution(
        p_inf=p,
        gain=optimal_gain(p, sys, w),
        j_min=lqg_min_cost(sys, w, v_inf, p),
        j_cheap=cheap_bound(v_inf, w.q),
        residual=maxabs(control_residual(p, sys, w)),
    )
