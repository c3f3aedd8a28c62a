"""Stationary solutions of continuous algebraic Riccati equations.

Both the filter and the control equation are handled in the canonical form

    X A + A^T X - X S X + H = 0,    S = S^T >= 0,

and solved either by integrating the differential form to steady state
(``method="ode"``) or by a Schur-vector solve (``method="schur"``, which
falls back to the flow when the Hamiltonian has eigenvalues on the
imaginary axis). Either way the result is polished with Newton-Kleinman iterations until the
residual stops improving.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import RK45
from scipy.linalg import solve_continuous_are, solve_continuous_lyapunov

log = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    """Steady state not reached; ``history`` holds the residual per step."""

    def __init__(self, message: str, history=()):
        super().__init__(message)
        self.history = list(history)


@dataclass(frozen=True)
class RiccatiOptions:
    method: str = "schur"
    tol: float = 1e-10
    rtol: float = 1e-11
    atol: float = 1e-14
    consecutive: int = 3
    max_time: float = 1e7
    max_steps: int = 500_000
    newton_iters: int = 10
    x0: np.ndarray | None = None

    def __post_init__(self):
        if self.method not in ("schur", "ode"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class RiccatiSolution:
    x: np.ndarray
    residual: float
    history: tuple[float, ...] = ()
    t: float = 0.0


def sym(x: np.ndarray) -> np.ndarray:
    return 0.5 * (x + x.T)


def care_rhs(x, a, s, h) -> np.ndarray:
    return sym(x @ a + a.T @ x - x @ s @ x + h)


def maxabs(x) -> float:
    return float(np.abs(x).max()) if np.size(x) else 0.0


def integrate_to_steady_state(
    rhs: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    opts: RiccatiOptions,
) -> RiccatiSolution:
    """Integrate ``dX/dt = rhs(X)`` until ``max|rhs| < tol`` on
    ``opts.consecutive`` accepted steps in a row."""
    dim = x0.shape[0]

    def f(_t, y):
        return rhs(y.reshape(dim, dim)).ravel()

    solver = RK45(f, 0.0, sym(x0).ravel(), opts.max_time, rtol=opts.rtol, atol=opts.atol)
    history = []
    streak = 0
    for _ in range(opts.max_steps):
        if solver.status != "running":
            break
        msg = solver.step()
        if msg is not None:
            raise ConvergenceError(f"integrator failed: {msg}", history)
        x = sym(solver.y.reshape(dim, dim))
        res = maxabs(rhs(x))
        if not np.isfinite(res):
            raise ConvergenceError("Riccati flow diverged", history)
        history.append(res)
        streak = streak + 1 if res < opts.tol else 0
        if streak >= opts.consecutive:
            return RiccatiSolution(x, res, tuple(history), solver.t)
    raise ConvergenceError(
        f"no steady state after {len(history)} steps (t={solver.t:.4g}, "
        f"residual {history[-1] if history else float('nan'):.3g})",
        history,
    )


def newton_polish(x, a, s, h, iters: int = 10) -> tuple[np.ndarray, float]:
    """Newton-Kleinman refinement; stops once the residual no longer drops."""
    best = sym(x)
    best_res = maxabs(care_rhs(best, a, s, h))
    for _ in range(iters):
        closed = a - s @ best
        try:
            cand = sym(solve_continuous_lyapunov(closed.T, -(h + best @ s @ best)))
        except (np.linalg.LinAlgError, ValueError):
            break
        res = maxabs(care_rhs(cand, a, s, h))
        if not res < best_res:
            break
        best, best_res = cand, res
        if best_res == 0.0:
            break
    return best, best_res


def solve_stationary(
    a: np.ndarray,
    b: np.ndarray,
    h: np.ndarray,
    r: np.ndarray,
    opts: RiccatiOptions,
    s_cross: np.ndarray | None = None,
) -> RiccatiSolution:
    """Stationary solution of ``X a + a^T X - (X b + s) r^-1 (X b + s)^T + h = 0``.

    The cross term is folded into the canonical form before solving.
    """
    rinv = np.linalg.inv(r)
    if s_cross is not None:
        a_hat = a - b @ rinv @ s_cross.T
        h_hat = sym(h - s_cross @ rinv @ s_cross.T)
    else:
        a_hat, h_hat = a, sym(h)
    s_mat = sym(b @ rinv @ b.T)

    history: tuple[float, ...] = ()
    t = 0.0
    x = None
    if opts.method == "schur":
        try:
            x = solve_continuous_are(a_hat, b, h_hat, r)
        except (np.linalg.LinAlgError, ValueError) as exc:
            # e.g. undamped unobservable modes; the flow can still settle
            log.info("Schur solve failed (%s); integrating the Riccati flow", exc)
    if x is None:
        x0 = np.zeros_like(a) if opts.x0 is None else np.asarray(opts.x0, dtype=float)
        sol = integrate_to_steady_state(lambda x: care_rhs(x, a_hat, s_mat, h_hat), x0, opts)
        x, history, t = sol.x, sol.history, sol.t
    x, res = newton_polish(x, a_hat, s_mat, h_hat, opts.newton_iters)
    if not np.isfinite(res):
        raise ConvergenceError("non-finite Riccati solution", history)
    if res > opts.tol:
        log.debug("Riccati residual %.3g above tolerance %.3g", res, opts.tol)
    return RiccatiSolution(x, res, history, t)


def hamiltonian_solve(a: np.ndarray, s: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Stabilizing solution from the stable eigenvectors of the Hamiltonian.

    Cheap and unpolished; callers needing a certified residual should use
    :func:`solve_stationary`.
    """
    dim = a.shape[0]
    ham = np.block([[a, -s], [-h, -a.T]])
    w, vecs = np.linalg.eig(ham)
    stable = np.argsort(w.real)[:dim]
    if not np.all(w.real[stable] < 0):
        raise ConvergenceError("Hamiltonian has no stable invariant subspace")
    u1, u2 = vecs[:dim, stable], vecs[dim:, stable]
    x = np.linalg.solve(u1.T, u2.T).T
    if not np.all(np.isfinite(x)) or maxabs(x.imag) > 1e-6 * max(1.0, maxabs(x.real)):
        raise ConvergenceError("ill-conditioned Hamiltonian eigenbasis")
    return sym(x.real)
