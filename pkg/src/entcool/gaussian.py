"""Symplectic structure, noise correlations and the linear system model.

Quadrature ordering is ``x = [q1, p1, ..., qn, pn]`` throughout, with the
symmetrized covariance convention in which the vacuum has covariance
``I/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

ATOL = 1e-10

SIGMA = np.array([[0.0, 1.0], [-1.0, 0.0]])
SIGMA.flags.writeable = False

Array = NDArray[np.float64]


class UnphysicalNoiseError(ValueError):
    """Noise parameters violate the quantum positivity constraint."""


def _frozen(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SymplecticForm:
    n: int
    matrix: Array


def symplectic(n: int) -> SymplecticForm:
    """Block-diagonal repetition of ``[[0, 1], [-1, 0]]`` for ``n`` modes."""
    if int(n) != n or n < 1:
        raise ValueError(f"mode count must be a positive integer, got {n!r}")
    n = int(n)
    return SymplecticForm(n, _frozen(np.kron(np.eye(n), SIGMA)))


def sigma_matrix(n: int) -> Array:
    return symplectic(n).matrix


@dataclass(frozen=True)
class NoiseBlock:
    """Correlation block of one field channel, ``dW dW^T = theta dt``."""

    N: float
    M: complex
    theta: NDArray[np.complex128]

    @property
    def re(self) -> Array:
        return self.theta.real

    @property
    def im(self) -> Array:
        return self.theta.imag


def _theta_from_nm(N: float, M: complex) -> NDArray[np.complex128]:
    return np.array(
        [
            [N + M.real + 0.5, M.imag + 0.5j],
            [M.imag - 0.5j, N - M.real + 0.5],
        ],
        dtype=complex,
    )


def is_physical_theta(theta: NDArray[np.complex128], tol: float = ATOL) -> bool:
    """Positivity of the Hermitian correlation block.

    ``theta = Re(theta) + (i/2) sigma`` so this is the uncertainty relation
    for the field quadratures; for the (N, M) parametrization it reduces to
    ``N (N + 1) >= |M|**2``.
    """
    herm = 0.5 * (theta + theta.conj().T)
    return bool(np.linalg.eigvalsh(herm).min() >= -tol)


def noise_block_from_NM(N: float, M: complex = 0.0) -> NoiseBlock:
    N = float(N)
    M = complex(M)
    theta = _theta_from_nm(N, M)
    if not is_physical_theta(theta):
        raise UnphysicalNoiseError(
            f"N={N}, M={M}: N(N+1)={N * (N + 1):.6g} < |M|^2={abs(M) ** 2:.6g}"
        )
    return NoiseBlock(N, M, _frozen(theta, complex))


def squeezed_theta(r: float) -> NoiseBlock:
    """Squeezed vacuum block ``0.5 * [[e^-r, i], [-i, e^r]]``.

    ``r > 0`` squeezes the q quadrature.
    """
    r = float(r)
    theta = 0.5 * np.array([[np.exp(-r), 1j], [-1j, np.exp(r)]])
    N = (np.cosh(r) - 1.0) / 2.0
    M = complex(-np.sinh(r) / 2.0)
    return NoiseBlock(N, M, _frozen(theta, complex))


def vacuum_block() -> NoiseBlock:
    return noise_block_from_NM(0.0, 0.0)


@dataclass(frozen=True)
class NoiseCorrelation:
    blocks: tuple[NoiseBlock, ...]
    re_theta: Array
    im_theta: Array

    @classmethod
    def from_blocks(cls, blocks: Sequence[NoiseBlock]) -> "NoiseCorrelation":
        blocks = tuple(blocks)
        m = len(blocks)
        if m == 0:
            raise ValueError("at least one noise channel is required")
        full = np.zeros((2 * m, 2 * m), dtype=complex)
        for j, b in enumerate(blocks):
            full[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = b.theta
        return cls(blocks, _frozen(full.real), _frozen(full.imag))

    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def full(self) -> NDArray[np.complex128]:
        return self.re_theta + 1j * self.im_theta


def build_structured_matrices(G, B, D) -> tuple[Array, Array]:
    """Drift and output matrices fixed by the commutation relations.

    Returns ``A = S_n (G + S_n^T B S_m B^T S_n / 2)`` and
    ``C = D S_m B^T S_n``.
    """
    G = np.asarray(G, dtype=float)
    B = np.asarray(B, dtype=float)
    D = np.asarray(D, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] % 2:
        raise ValueError(f"G must be 2n x 2n, got shape {G.shape}")
    if B.ndim != 2 or B.shape[0] != G.shape[0] or B.shape[1] % 2:
        raise ValueError(f"B must be {G.shape[0]} x 2m, got shape {B.shape}")
    if D.ndim != 2 or D.shape[1] != B.shape[1]:
        raise ValueError(f"D must be l x {B.shape[1]}, got shape {D.shape}")
    if not np.allclose(G, G.T, rtol=0.0, atol=ATOL):
        raise ValueError("G must be symmetric")
    Sn = sigma_matrix(G.shape[0] // 2)
    Sm = sigma_matrix(B.shape[1] // 2)
    A = Sn @ (G + Sn.T @ B @ Sm @ B.T @ Sn / 2.0)
    C = D @ Sm @ B.T @ Sn
    return A, C


@dataclass(frozen=True)
class SystemModel:
    """Linear quantum system ``dx = A x dt + F u dt + B dW``, ``dy = C x dt + D dW``.

    ``A`` is the structural drift. Bath corrections live in ``extra_drift``
    and ``extra_diffusion`` so that the structural identities can still be
    checked; use :attr:`drift` and :attr:`diffusion` for the dynamics.
    """

    A: Array
    B: Array
    C: Array
    D: Array
    F: Array
    G: Array
    noise: NoiseCorrelation
    extra_drift: Array = field(default=None)
    extra_diffusion: Array = field(default=None)

    def __post_init__(self):
        for name in ("A", "B", "C", "D", "F", "G"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        dim = self.A.shape[0]
        for name in ("extra_drift", "extra_diffusion"):
            value = getattr(self, name)
            value = np.zeros((dim, dim)) if value is None else value
            object.__setattr__(self, name, _frozen(value))
        m2 = self.B.shape[1]
        if self.noise.re_theta.shape != (m2, m2):
            raise ValueError(
                f"noise has {self.noise.re_theta.shape[0]} quadratures, B has {m2}"
            )
        if self.C.shape != (self.D.shape[0], dim):
            raise ValueError(f"C shape {self.C.shape} inconsistent with D and A")
        if self.F.shape[0] != dim:
            raise ValueError(f"F must have {dim} rows, got {self.F.shape[0]}")

    @classmethod
    def structured(cls, G, B, D, F, noise: NoiseCorrelation, **kw) -> "SystemModel":
        A, C = build_structured_matrices(G, B, D)
        return cls(A=A, B=B, C=C, D=D, F=F, G=G, noise=noise, **kw)

    @property
    def n(self) -> int:
        return self.A.shape[0] // 2

    @property
    def m(self) -> int:
        return self.B.shape[1] // 2

    @property
    def ell(self) -> int:
        return self.D.shape[0]

    @property
    def re_theta(self) -> Array:
        return self.noise.re_theta

    @property
    def drift(self) -> Array:
        return self.A + self.extra_drift

    @property
    def diffusion(self) -> Array:
        return self.B @ self.re_theta @ self.B.T + self.extra_diffusion

    @property
    def cross(self) -> Array:
        """Correlation ``B Re(Theta) D^T`` between process and measurement noise."""
        return self.B @ self.re_theta @ self.D.T

    @property
    def innovation_cov(self) -> Array:
        return self.D @ self.re_theta @ self.D.T

    def replace(self, **changes) -> "SystemModel":
        kw = {
            name: getattr(self, name)
            for name in (
                "A", "B", "C", "D", "F", "G", "noise", "extra_drift", "extra_diffusion",
            )
        }
        kw.update(changes)
        return SystemModel(**kw)


def validate_system(sys: SystemModel, tol: float = ATOL) -> list[str]:
    """Return a description of every violated structural invariant."""
    problems = []
    G, B, D = sys.G, sys.B, sys.D
    if np.abs(G - G.T).max() > tol:
        problems.append("G is not symmetric")
    Sm = sigma_matrix(sys.m)
    dsd = D @ Sm @ D.T
    if dsd.size and np.abs(dsd).max() > tol:
        problems.append(f"D Sigma_m D^T != 0 (max |entry| {np.abs(dsd).max():.3g})")
    try:
        A_ref, C_ref = build_structured_matrices(G, B, D)
    except ValueError as exc:
        problems.append(f"cannot rebuild A, C: {exc}")
    else:
        err = np.abs(sys.A - A_ref).max()
        if err > tol:
            problems.append(f"A violates the structural relation (max error {err:.3g})")
        if C_ref.size:
            err = np.abs(sys.C - C_ref).max()
            if err > tol:
                problems.append(f"C violates the structural relation (max error {err:.3g})")
    for j, block in enumerate(sys.noise.blocks):
        th = block.theta
        if np.abs(th - th.conj().T).max() > tol:
            problems.append(f"noise block {j} is not Hermitian")
        if abs(th[0, 1] - th[1, 0] - 1j) > tol:
            problems.append(f"noise block {j} violates [dQ, dP] = i dt")
        if not is_physical_theta(th, tol):
            problems.append(f"noise block {j} is unphysical")
    ed = sys.extra_diffusion
    if np.abs(ed - ed.T).max() > tol:
        problems.append("extra_diffusion is not symmetric")
    elif np.linalg.eigvalsh(ed).min() < -tol:
        problems.append("extra_diffusion is not positive semidefinite")
    return problems
