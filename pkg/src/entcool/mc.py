"""Monte Carlo check of the stationary filter covariance.

The classical Gaussian analog of the linear system shares the first and
symmetrized second moments of the quantum model, so its Euler-Maruyama
trajectories, filtered with the stationary gain, must reproduce the
stationary error covariance. Nothing here simulates operators; the quantum
structure only enters through ``Re(Theta)`` and the constraints on A, C.

Every trajectory draws from its own Philox stream keyed by
``(seed, trajectory index)``, so results do not depend on how trajectories
are batched or how many threads run them.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, solve_discrete_lyapunov

from .gaussian import SystemModel
from .kalman import (
    CovarianceMatrix,
    FilterGain,
    kalman_gain,
    UnstableSystemError,
    stationary_covariance,
)

log = logging.getLogger(__name__)

BLOCK = 1000
CHUNK = 400
SCHEMES = ("euler", "exponential")


@dataclass(frozen=True)
class TrajectoryState:
    x: np.ndarray
    pi: np.ndarray
    t: float = 0.0


@dataclass(frozen=True)
class MeasurementRecord:
    dt: float
    dy: np.ndarray
    seed: int
    du: np.ndarray | None = None

    def __post_init__(self):
        if self.du is not None and self.du.shape[:2] != self.dy.shape[:2]:
            raise ValueError("control record length differs from measurement record")

    @property
    def n_steps(self) -> int:
        return self.dy.shape[0]


def trajectory_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    key = (index,) if stream == 0 else (index, stream)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def initial_states(seed: int, n_traj: int, dim: int, first: int = 0) -> np.ndarray:
    """Vacuum draws ``x0 ~ N(0, I/2)`` from a stream separate from the noise.

    The filter starts at the vacuum mean, so its initial error covariance
    is ``I/2``.
    """
    return np.stack(
        [trajectory_rng(seed, first + i, stream=1).standard_normal(dim) for i in range(n_traj)]
    ) * np.sqrt(0.5)


def _psd_factor(m: np.ndarray) -> np.ndarray:
    """Factor ``L`` with ``L L^T = m`` keeping only the nonzero directions."""
    w, u = np.linalg.eigh(0.5 * (m + m.T))
    keep = w > 1e-14 * max(1.0, w.max(initial=0.0))
    return u[:, keep] * np.sqrt(w[keep])


@dataclass(frozen=True)
class _Noise:
    """Per-step noise factors: ``dW = sqrt(dt) z_W L_W^T`` and bath kicks."""

    chol_theta: np.ndarray
    bath: np.ndarray

    @classmethod
    def for_system(cls, sys: SystemModel) -> "_Noise":
        return cls(np.linalg.cholesky(sys.re_theta), _psd_factor(sys.extra_diffusion))

    @property
    def width(self) -> int:
        return self.chol_theta.shape[0] + self.bath.shape[1]


def _draw(rngs, n_steps: int, width: int, substeps: int) -> np.ndarray:
    """Standard normals of shape (n_steps, n_traj, width), optionally summed
    over ``substeps`` fine steps so coarse and fine runs share paths."""
    z = np.empty((len(rngs), n_steps * substeps, width))
    for g, row in zip(rngs, z):
        g.standard_normal(out=row)
    if substeps > 1:
        z = z.reshape(len(rngs), n_steps, substeps, width).sum(axis=2) / np.sqrt(substeps)
    return z.transpose(1, 0, 2)


def _split(z: np.ndarray, noise: _Noise, dt: float):
    k = noise.chol_theta.shape[0]
    dw = np.sqrt(dt) * z[..., :k] @ noise.chol_theta.T
    kick = np.sqrt(dt) * z[..., k:] @ noise.bath.T
    return dw, kick


def drift_step(sys: SystemModel, dt: float, scheme: str = "euler") -> np.ndarray:
    """One-step drift propagator: ``I + A dt`` (Euler-Maruyama) or
    ``exp(A dt)`` (exponential Euler). Noise and innovation terms are
    explicit in both schemes."""
    if scheme == "euler":
        return np.eye(sys.drift.shape[0]) + sys.drift * dt
    if scheme == "exponential":
        return expm(sys.drift * dt)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def discrete_error_covariance(sys: SystemModel, gain, dt: float, scheme: str = "euler") -> np.ndarray:
    """Exact stationary covariance of the discretized error recursion
    ``e' = (Phi - K C dt) e + (B - K D) dW + bath``.

    Its difference from the continuous-time solution is the step-size bias
    the Monte Carlo estimate converges to.
    """
    k = gain.k if isinstance(gain, FilterGain) else np.asarray(gain, dtype=float)
    phi = drift_step(sys, dt, scheme) - k @ sys.C * dt
    g = sys.B - k @ sys.D
    q = (g @ sys.re_theta @ g.T + sys.extra_diffusion) * dt
    v = solve_discrete_lyapunov(phi, q)
    return 0.5 * (v + v.T)


def _check_step(sys: SystemModel, dt: float):
    a = sys.drift
    if np.linalg.eigvals(a).real.max() >= 0:
        raise UnstableSystemError("drift is not Hurwitz; the analog has no stationary state")
    if np.linalg.norm(a, 2) * dt >= 0.1:
        raise ValueError(f"dt={dt} too coarse: |A| dt = {np.linalg.norm(a, 2) * dt:.3g}")


def simulate_classical_analog(
    sys: SystemModel,
    horizon: float,
    dt: float = 1e-3,
    seed: int = 0,
    n_traj: int = 1,
    x0=None,
    u=None,
    substeps: int = 1,
    scheme: str = "euler",
):
    """Euler-Maruyama paths of ``dx = A x dt + F u dt + B dW (+ bath)`` and
    ``dy = C x dt + D dW``.

    Returns ``(xs, record)`` with ``xs`` of shape ``(steps + 1, n_traj, 2n)``.
    ``x0`` may be a vector or an ``(n_traj, 2n)`` array; default zero.
    ``scheme="exponential"`` propagates the drift exactly over each step.
    """
    _check_step(sys, dt)
    n_steps = int(round(horizon / dt))
    dim = 2 * sys.n
    noise = _Noise.for_system(sys)
    rngs = [trajectory_rng(seed, i) for i in range(n_traj)]
    xs = np.empty((n_steps + 1, n_traj, dim))
    xs[0] = 0.0 if x0 is None else x0
    dy = np.empty((n_steps, n_traj, sys.ell))
    du = None if u is None else np.broadcast_to(u, (n_steps, n_traj, sys.F.shape[1])) * dt
    a_step = drift_step(sys, dt, scheme)
    for start in range(0, n_steps, CHUNK):
        stop = min(start + CHUNK, n_steps)
        dw, kick = _split(_draw(rngs, stop - start, noise.width, substeps), noise, dt)
        bdw = dw @ sys.B.T + kick
        if du is not None:
            bdw += du[start:stop] @ sys.F.T
        for j, k in enumerate(range(start, stop)):
            xs[k + 1] = xs[k] @ a_step.T + bdw[j]
        dy[start:stop] = xs[start:stop] @ sys.C.T * dt + dw @ sys.D.T
    record = MeasurementRecord(dt, dy, seed, du)
    return xs, record


def run_filter(
    record: MeasurementRecord, sys: SystemModel, gain, pi0=None, scheme: str = "euler"
) -> np.ndarray:
    """Discretized filter ``d pi = A pi dt + F du + K (dy - C pi dt)``."""
    k_gain = gain.k if isinstance(gain, FilterGain) else np.asarray(gain, dtype=float)
    dim = 2 * sys.n
    if k_gain.shape != (dim, sys.ell) or record.dy.shape[2] != sys.ell:
        raise ValueError("gain and record dimensions do not match the system")
    dt = record.dt
    n_steps, n_traj = record.dy.shape[:2]
    pis = np.empty((n_steps + 1, n_traj, dim))
    pis[0] = 0.0 if pi0 is None else pi0
    closed = (drift_step(sys, dt, scheme) - k_gain @ sys.C * dt).T
    drive = record.dy @ k_gain.T
    if record.du is not None:
        drive = drive + record.du @ sys.F.T
    for k in range(n_steps):
        pis[k + 1] = pis[k] @ closed + drive[k]
    return pis


def _bootstrap_se(samples: np.ndarray, n_boot: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = samples.shape[0]
    idx = rng.integers(0, n, size=(n_boot, n))
    means = samples[idx].mean(axis=1)
    return means.std(axis=0, ddof=1)


def empirical_error_covariance(xs, pis, burn_in: int, n_boot: int = 200, seed: int = 0):
    """Sample covariance of ``x - pi`` after ``burn_in`` steps.

    Each trajectory contributes its time-averaged outer product; standard
    errors come from a bootstrap over trajectories.
    """
    xs = np.asarray(xs)
    pis = np.asarray(pis)
    if xs.shape != pis.shape:
        raise ValueError("state and estimate paths differ in shape")
    if xs.shape[1] < 2:
        raise ValueError("need at least two trajectories")
    if not 0 <= burn_in < xs.shape[0]:
        raise ValueError("burn_in must be shorter than the paths")
    err = (xs - pis)[burn_in:]
    per_traj = np.einsum("tni,tnj->nij", err, err) / err.shape[0]
    per_traj = 0.5 * (per_traj + per_traj.transpose(0, 2, 1))
    return per_traj.mean(axis=0), _bootstrap_se(per_traj, n_boot, seed)


@dataclass
class _Sums:
    err: np.ndarray
    innov: np.ndarray
    lag1: np.ndarray
    err_steps: int = 0
    innov_steps: int = 0
    lag_steps: int = 0


def _outer_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-trajectory ``sum_t a_t b_t^T`` for arrays shaped (t, traj, dim)."""
    return np.matmul(a.transpose(1, 2, 0), b.transpose(1, 0, 2))


def _run_block(sys, gain, noise, seed, first, count, dt, n_burn, n_total, substeps, scheme):
    """Lockstep simulation + filtering for one block of trajectories,
    accumulating per-trajectory statistics after burn-in.

    State and estimate are stacked so each step is one matrix product.
    """
    dim = 2 * sys.n
    ell = sys.ell
    rngs = [trajectory_rng(seed, first + i) for i in range(count)]
    a_step = drift_step(sys, dt, scheme)
    k_gain = gain.k
    kc = k_gain @ sys.C * dt
    step = np.ascontiguousarray(
        np.block([[a_step, np.zeros((dim, dim))], [kc, a_step - kc]]).T
    )
    # standard normals -> [state kick, estimate kick, D dW]
    n_field = noise.chol_theta.shape[0]
    field = np.sqrt(dt) * noise.chol_theta
    proj = np.zeros((noise.width, 2 * dim + ell))
    proj[:n_field, :dim] = (sys.B @ field).T
    proj[n_field:, :dim] = np.sqrt(dt) * noise.bath.T
    proj[:n_field, dim : 2 * dim] = (k_gain @ sys.D @ field).T
    proj[:n_field, 2 * dim :] = (sys.D @ field).T

    s = np.zeros((count, 2 * dim))
    s[:, :dim] = initial_states(seed, count, dim, first)
    sums = _Sums(
        np.zeros((count, dim, dim)), np.zeros((count, ell, ell)), np.zeros((count, ell, ell))
    )
    prev = None
    for start in range(0, n_total, CHUNK):
        stop = min(start + CHUNK, n_total)
        steps = stop - start
        mixed = _draw(rngs, steps, noise.width, substeps) @ proj
        path = np.empty((steps + 1, count, 2 * dim))
        path[0] = s
        path[1:] = mixed[..., : 2 * dim]
        for j in range(steps):
            path[j + 1] += path[j] @ step
        s = path[-1]
        err = path[:, :, :dim] - path[:, :, dim:]
        nus = err[:-1] @ (sys.C.T * dt) + mixed[..., 2 * dim :]
        lo = max(n_burn - start, 0)
        if lo < steps:
            e = err[1 + lo :]
            v = nus[lo:]
            sums.err += _outer_sum(e, e)
            sums.err_steps += e.shape[0]
            sums.innov += _outer_sum(v, v)
            sums.innov_steps += v.shape[0]
            if prev is not None and start > n_burn:
                sums.lag1 += v[0][:, :, None] * prev[:, None, :]
                sums.lag_steps += 1
            sums.lag1 += _outer_sum(v[1:], v[:-1])
            sums.lag_steps += v.shape[0] - 1
        prev = nus[-1]
    return sums


@dataclass
class MCReport:
    v_ref: np.ndarray
    v_emp: np.ndarray
    v_se: np.ndarray
    innov_emp: np.ndarray
    innov_ref: np.ndarray
    innov_se: np.ndarray
    lag1_emp: np.ndarray
    lag1_se: np.ndarray
    n_traj: int
    dt: float
    burn_in: float
    window: float
    tau: float
    threshold: float = 5.0
    lag_threshold: float = 3.0
    extra: dict = field(default_factory=dict)

    @property
    def v_z(self) -> np.ndarray:
        return np.abs(self.v_emp - self.v_ref) / self.v_se

    @property
    def innov_z(self) -> np.ndarray:
        return np.abs(self.innov_emp - self.innov_ref) / self.innov_se

    @property
    def lag1_z(self) -> np.ndarray:
        return np.abs(self.lag1_emp) / self.lag1_se

    @property
    def bias_z(self) -> np.ndarray | None:
        """Predicted step-size bias of the estimate, in standard errors."""
        vd = self.extra.get("v_discrete")
        return None if vd is None else np.abs(vd - self.v_ref) / self.v_se

    @property
    def covariance_ok(self) -> bool:
        return bool(self.v_z.max() < self.threshold)

    @property
    def whiteness_ok(self) -> bool:
        return bool(self.innov_z.max() < self.threshold and self.lag1_z.max() < self.lag_threshold)

    @property
    def passed(self) -> bool:
        return self.covariance_ok and self.whiteness_ok

    def lines(self) -> list[str]:
        out = []
        dim = self.v_ref.shape[0]
        for i in range(dim):
            for j in range(i, dim):
                z = self.v_z[i, j]
                out.append(
                    f"{'PASS' if z < self.threshold else 'FAIL'} V[{i},{j}] "
                    f"ref={self.v_ref[i, j]:+.6f} emp={self.v_emp[i, j]:+.6f} "
                    f"se={self.v_se[i, j]:.2e} dev={z:.2f} se"
                )
        out.append(
            f"{'PASS' if self.innov_z.max() < self.threshold else 'FAIL'} innovation covariance "
            f"max dev {self.innov_z.max():.2f} se"
        )
        out.append(
            f"{'PASS' if self.lag1_z.max() < self.lag_threshold else 'FAIL'} innovation lag-1 "
            f"max dev {self.lag1_z.max():.2f} se"
        )
        if self.bias_z is not None:
            out.append(
                f"INFO {self.extra.get('scheme', 'euler')} step-size bias at dt={self.dt:g}: "
                f"max {self.bias_z.max():.2f} se"
            )
        return out


def monte_carlo_check(
    sys: SystemModel,
    n_traj: int = 2000,
    dt: float = 1e-3,
    seed: int = 0,
    burn_in_tau: float = 2.0,
    window_tau: float = 2.0,
    v_ref: CovarianceMatrix | None = None,
    threads: int = 1,
    substeps: int = 1,
    n_boot: int = 200,
    scheme: str = "euler",
) -> MCReport:
    """Compare the filtered-error covariance of simulated trajectories with
    the stationary Riccati solution.

    Burn-in and averaging window are measured in units of the slowest
    relaxation time of the error dynamics ``A - K C``.
    """
    _check_step(sys, dt)
    v_ref = v_ref if v_ref is not None else stationary_covariance(sys)
    gain = kalman_gain(v_ref, sys)
    rate = -np.linalg.eigvals(sys.drift - gain.k @ sys.C).real.max()
    if rate <= 0:
        raise UnstableSystemError("filter error dynamics are not stable")
    tau = 1.0 / rate
    n_burn = int(round(burn_in_tau * tau / dt))
    n_total = n_burn + int(round(window_tau * tau / dt))
    noise = _Noise.for_system(sys)
    blocks = [(b, min(BLOCK, n_traj - b)) for b in range(0, n_traj, BLOCK)]
    log.info(
        "MC: %d trajectories, dt=%g, tau=%.3g, %d steps (%d burn-in)",
        n_traj, dt, tau, n_total, n_burn,
    )

    def work(blk):
        return _run_block(
            sys, gain, noise, seed, blk[0], blk[1], dt, n_burn, n_total, substeps, scheme
        )

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(b) for b in blocks]

    err = np.concatenate([s.err / s.err_steps for s in parts])
    err = 0.5 * (err + err.transpose(0, 2, 1))
    innov = np.concatenate([s.innov / s.innov_steps for s in parts])
    lag1 = np.concatenate([s.lag1 / s.lag_steps for s in parts])

    # Euler-Maruyama adds C V C^T dt^2 to the exact D Re(Theta) D^T dt.
    innov_ref = sys.innovation_cov * dt + sys.C @ v_ref.v @ sys.C.T * dt**2
    return MCReport(
        v_ref=v_ref.v,
        v_emp=err.mean(axis=0),
        v_se=_bootstrap_se(err, n_boot, seed),
        innov_emp=innov.mean(axis=0),
        innov_ref=innov_ref,
        innov_se=_bootstrap_se(innov, n_boot, seed + 1),
        lag1_emp=lag1.mean(axis=0),
        lag1_se=_bootstrap_se(lag1, n_boot, seed + 2),
        n_traj=n_traj,
        dt=dt,
        burn_in=n_burn * dt,
        window=(n_total - n_burn) * dt,
        tau=tau,
        extra={"scheme": scheme, "v_discrete": discrete_error_covariance(sys, gain, dt, scheme)},
    )


def stationary_state_covariance(xs: np.ndarray, burn_in: int) -> np.ndarray:
    """Pooled sample covariance of the states after burn-in."""
    s = xs[burn_in:].reshape(-1, xs.shape[2])
    return np.cov(s, rowvar=False)


__all__ = [
    "TrajectoryState",
    "MeasurementRecord",
    "simulate_classical_analog",
    "run_filter",
    "empirical_error_covariance",
    "monte_carlo_check",
    "MCReport",
    "initial_states",
    "stationary_state_covariance",
]
