"""Quantum Kalman filter covariance: gain, Riccati flow, steady state and
the unconditional (unmeasured) covariance."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .gaussian import SystemModel, sigma_matrix
from .riccati import ConvergenceError, RiccatiOptions, maxabs, solve_stationary, sym

COND_LIMIT = 1e12
UNCERTAINTY_TOL = 1e-9


class DegenerateMeasurementError(ValueError):
    def __init__(self, cond: float):
        super().__init__(
            f"innovation covariance D Re(Theta) D^T is singular (condition number {cond:.3g})"
        )
        self.cond = cond


class UnstableSystemError(ValueError):
    pass


@dataclass(frozen=True)
class CovarianceMatrix:
    v: np.ndarray
    residual: float = 0.0

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        v.flags.writeable = False
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.v.shape[0] // 2

    def uncertainty_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of ``V + (i/2) Sigma``; physical states have all >= 0."""
        return np.linalg.eigvalsh(self.v + 0.5j * sigma_matrix(self.n))

    def violations(self) -> list[str]:
        out = []
        if maxabs(self.v - self.v.T) > 1e-12:
            out.append("covariance is not symmetric")
        lo = self.uncertainty_eigenvalues().min()
        if lo < -UNCERTAINTY_TOL:
            out.append(f"uncertainty relation violated (min eigenvalue {lo:.3g})")
        return out


@dataclass(frozen=True)
class FilterGain:
    k: np.ndarray


def _innovation_inverse(sys: SystemModel) -> np.ndarray:
    r = sys.innovation_cov
    cond = np.linalg.cond(r)
    if not cond < COND_LIMIT:
        raise DegenerateMeasurementError(float(cond))
    return np.linalg.inv(r)


def _as_array(v) -> np.ndarray:
    return v.v if isinstance(v, CovarianceMatrix) else np.asarray(v, dtype=float)


def kalman_gain(v, sys: SystemModel) -> FilterGain:
    """``K = (V C^T + B Re(Theta) D^T) (D Re(Theta) D^T)^-1``."""
    v = _as_array(v)
    return FilterGain((v @ sys.C.T + sys.cross) @ _innovation_inverse(sys))


def riccati_rhs(v, sys: SystemModel) -> np.ndarray:
    v = _as_array(v)
    k = kalman_gain(v, sys).k
    a = sys.drift
    out = a @ v + v @ a.T + sys.diffusion - k @ sys.innovation_cov @ k.T
    return sym(out)


def stationary_covariance(sys: SystemModel, opts: RiccatiOptions | None = None) -> CovarianceMatrix:
    """Stationary error covariance of the filter.

    Raises :class:`ConvergenceError` (with the residual history) if no
    steady state within ``opts.tol`` is found.
    """
    opts = opts or RiccatiOptions()
    if opts.x0 is None:
        opts = dataclasses.replace(opts, x0=0.5 * np.eye(2 * sys.n))
    _innovation_inverse(sys)
    sol = solve_stationary(
        sys.drift.T, sys.C.T, sys.diffusion, sys.innovation_cov, opts, s_cross=sys.cross
    )
    v = sym(sol.x)
    res = maxabs(riccati_rhs(v, sys))
    if not res <= opts.tol:
        raise ConvergenceError(
            f"filter Riccati residual {res:.3g} exceeds {opts.tol:.3g}", sol.history
        )
    return CovarianceMatrix(v, res)


def unconditional_covariance(sys: SystemModel) -> CovarianceMatrix:
    """Solve ``A V + V A^T + B Re(Theta) B^T + extra_diffusion = 0``."""
    a = sys.drift
    lead = np.linalg.eigvals(a).real.max()
    if not lead < 0:
        raise UnstableSystemError(f"drift is not Hurwitz (max Re eig {lead:.3g})")
    v = sym(solve_continuous_lyapunov(a, -sys.diffusion))
    res = maxabs(a @ v + v @ a.T + sys.diffusion)
    return CovarianceMatrix(v, res)


def closed_loop_rate(sys: SystemModel, gain: FilterGain) -> float:
    """Slowest decay rate of the estimation error dynamics ``A - K C``."""
    return float(-np.linalg.eigvals(sys.drift - gain.k @ sys.C).real.max())
