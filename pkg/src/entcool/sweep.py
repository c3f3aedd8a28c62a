"""Reflectivity sweeps with homodyne-phase optimization, config files and CSV output."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .gaussian import sigma_matrix
from .kalman import stationary_covariance
from .lqg import cheap_bound
from .network import NetworkConfig, homodyne_selectors, network_scattering
from .oscillator import DEFAULT_PARAMS, OscillatorParams, build_system, energy_weight
from .riccati import ConvergenceError, hamiltonian_solve, sym

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "beta1_sq",
    "theta1_opt",
    "theta2_opt",
    "e_min",
    "cheap_bound",
    "residual",
    "converged",
)


@dataclass(frozen=True)
class SweepSpec:
    beta1_sq_grid: tuple[float, ...]
    beta2_sq: float = 0.0
    delta_sq: float = 0.9
    phase_grid_points: int = 24
    refine_iters: int = 30
    model: OscillatorParams = DEFAULT_PARAMS
    r: float = 2.3

    def __post_init__(self):
        object.__setattr__(self, "beta1_sq_grid", tuple(float(b) for b in self.beta1_sq_grid))
        if not self.beta1_sq_grid:
            raise ValueError("beta1_sq grid is empty")
        if self.phase_grid_points < 4:
            raise ValueError("phase_grid_points must be at least 4")
        NetworkConfig(0.0, self.beta2_sq, self.delta_sq)
        for b in self.beta1_sq_grid:
            NetworkConfig(b)


@dataclass(frozen=True)
class SweepRow:
    beta1_sq: float
    theta1_opt: float
    theta2_opt: float
    e_min: float
    cheap_bound: float
    residual: float
    converged: bool

    @classmethod
    def failed(cls, beta1_sq: float) -> "SweepRow":
        nan = float("nan")
        return cls(beta1_sq, nan, nan, nan, nan, nan, False)


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    @property
    def all_converged(self) -> bool:
        return all(r.converged for r in self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


class PhaseObjective:
    """E_min as a function of the two detector phases for fixed reflectivities.

    Everything except the detector selectors is precomputed, and the
    stationary covariance is taken from the Hamiltonian eigenvectors without
    polishing; final values are recomputed with the certified solver.
    """

    def __init__(self, cfg: NetworkConfig, params: OscillatorParams = DEFAULT_PARAMS, F=None):
        self.cfg = cfg
        self.params = params
        self.F = F
        sys = build_system(cfg, params, F)
        self.sys = sys
        self.scatter = network_scattering(cfg)
        self.to_c = sigma_matrix(sys.m) @ sys.B.T @ sigma_matrix(sys.n)
        self.theta = sys.re_theta
        self.drift = sys.drift
        self.diffusion = sys.diffusion
        self.b_theta = sys.B @ sys.re_theta
        self.evaluations = 0
        self.failures = 0

    def covariance(self, theta1: float, theta2: float) -> np.ndarray:
        d = homodyne_selectors(theta1, theta2) @ self.scatter
        c = d @ self.to_c
        rinv = np.linalg.inv(d @ self.theta @ d.T)
        cross = self.b_theta @ d.T
        a_hat = (self.drift - cross @ rinv @ c).T
        s_mat = sym(c.T @ rinv @ c)
        h_hat = sym(self.diffusion - cross @ rinv @ cross.T)
        return hamiltonian_solve(a_hat, s_mat, h_hat)

    def __call__(self, theta1: float, theta2: float) -> float:
        self.evaluations += 1
        try:
            v = self.covariance(theta1, theta2)
        except (ConvergenceError, np.linalg.LinAlgError):
            self.failures += 1
            return math.inf
        return float((v[0, 0] + v[1, 1] - 1.0) / 2.0)


@dataclass(frozen=True)
class PhaseOptimum:
    theta1: float
    theta2: float
    e_min: float
    grid_best: float
    failures: int


def optimize_phases(
    cfg: NetworkConfig,
    grid_points: int = 24,
    refine_iters: int = 30,
    params: OscillatorParams = DEFAULT_PARAMS,
    objective=None,
) -> PhaseOptimum:
    """Minimize E_min over both detector phases.

    Uniform ``grid_points`` x ``grid_points`` grid on [0, pi)^2 (homodyne
    phases are pi-periodic), then ``refine_iters`` rounds of coordinate
    search: each round tries +-h on each phase and halves h when nothing
    improves. Any phase of ``cfg`` is ignored.
    """
    if grid_points < 4:
        raise ValueError("grid_points must be at least 4")
    f = objective if objective is not None else PhaseObjective(cfg, params)
    grid = np.arange(grid_points) * (math.pi / grid_points)
    best = (math.inf, 0.0, 0.0)
    for t1 in grid:
        for t2 in grid:
            val = f(t1, t2)
            if val < best[0]:
                best = (val, float(t1), float(t2))
    if not math.isfinite(best[0]):
        raise ConvergenceError("no phase grid point produced a stationary solution")
    grid_best = best[0]
    val, t1, t2 = best
    h = math.pi / grid_points
    for _ in range(refine_iters):
        moved = False
        for axis in (0, 1):
            for sign in (1.0, -1.0):
                c1 = (t1 + sign * h) % math.pi if axis == 0 else t1
                c2 = (t2 + sign * h) % math.pi if axis == 1 else t2
                cand = f(c1, c2)
                if cand < val:
                    val, t1, t2 = cand, c1, c2
                    moved = True
                    break
        if not moved:
            h /= 2.0
    failures = getattr(f, "failures", 0)
    return PhaseOptimum(t1, t2, val, grid_best, failures)


def evaluate_point(cfg: NetworkConfig, params: OscillatorParams = DEFAULT_PARAMS, F=None):
    """Certified stationary covariance and E_min at fixed phases."""
    sys = build_system(cfg, params, F)
    v = stationary_covariance(sys)
    cb = cheap_bound(v, energy_weight())
    return sys, v, cb


def _row(args) -> SweepRow:
    beta1_sq, spec = args
    cfg = NetworkConfig(beta1_sq, spec.beta2_sq, spec.delta_sq, r=spec.r)
    try:
        opt = optimize_phases(cfg, spec.phase_grid_points, spec.refine_iters, spec.model)
        _, v, cb = evaluate_point(cfg.with_phases(opt.theta1, opt.theta2), spec.model)
    except (ConvergenceError, np.linalg.LinAlgError, ValueError) as exc:
        log.warning("beta1_sq=%.6g failed: %s", beta1_sq, exc)
        return SweepRow.failed(beta1_sq)
    return SweepRow(
        beta1_sq=beta1_sq,
        theta1_opt=opt.theta1,
        theta2_opt=opt.theta2,
        e_min=(cb - 1.0) / 2.0,
        cheap_bound=cb,
        residual=v.residual,
        converged=v.residual <= 1e-10,
    )


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """One row per grid point, in grid order regardless of ``workers``."""
    jobs = [(b, spec) for b in spec.beta1_sq_grid]
    rows = []
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            for i, row in enumerate(pool.map(_row, jobs)):
                rows.append(row)
                log.info("row %d/%d beta1_sq=%.4f e_min=%.6f", i + 1, len(jobs), row.beta1_sq, row.e_min)
    else:
        for i, job in enumerate(jobs):
            row = _row(job)
            rows.append(row)
            log.info("row %d/%d beta1_sq=%.4f e_min=%.6f", i + 1, len(jobs), row.beta1_sq, row.e_min)
    return SweepResult(rows)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    return format(float(value), ".15g")


def emit_csv(result: SweepResult, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in result.rows:
            writer.writerow([_fmt(getattr(row, c)) for c in CSV_COLUMNS])
    return path


def read_csv(path) -> SweepResult:
    rows = []
    with Path(path).open(newline="") as fh:
        for rec in csv.DictReader(fh):
            vals = {k: float(rec[k]) for k in CSV_COLUMNS if k != "converged"}
            rows.append(SweepRow(converged=rec["converged"] == "1", **vals))
    return SweepResult(rows)


# ---------------------------------------------------------------- config files

_MODEL_KEYS = {
    "omega": "omega",
    "lambda": "lam",
    "kappa": "kappa",
    "delta_detuning": "delta_detuning",
    "gamma": "gamma",
    "nbar": "nbar",
    "bath_diffusion_scale": "bath_diffusion_scale",
}
_FLOAT_KEYS = {
    "r", "beta2_sq", "delta_loss_sq", "beta1_sq_min", "beta1_sq_max", "beta1_sq",
    "theta1", "theta2",
}
_INT_KEYS = {"beta1_sq_steps", "phase_grid", "refine_iters"}
_STR_KEYS = {"output"}

DEFAULTS = {
    "r": 2.3,
    "beta2_sq": 0.0,
    "delta_loss_sq": 0.9,
    "beta1_sq_min": 0.0,
    "beta1_sq_max": 1.0,
    "beta1_sq_steps": 101,
    "phase_grid": 24,
    "refine_iters": 30,
}


def parse_config(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key in _MODEL_KEYS or key in _FLOAT_KEYS:
            out[key] = float(value)
        elif key in _INT_KEYS:
            out[key] = int(value)
        elif key in _STR_KEYS:
            out[key] = value
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    return out


def load_config(path) -> dict:
    return parse_config(Path(path).read_text())


def model_from_config(conf: dict) -> OscillatorParams:
    kw = {attr: conf[key] for key, attr in _MODEL_KEYS.items() if key in conf}
    return replace(DEFAULT_PARAMS, **kw)


def spec_from_config(conf: dict) -> SweepSpec:
    c = {**DEFAULTS, **conf}
    grid = np.linspace(c["beta1_sq_min"], c["beta1_sq_max"], c["beta1_sq_steps"])
    return SweepSpec(
        beta1_sq_grid=tuple(float(b) for b in grid),
        beta2_sq=c["beta2_sq"],
        delta_sq=c["delta_loss_sq"],
        phase_grid_points=c["phase_grid"],
        refine_iters=c["refine_iters"],
        model=model_from_config(conf),
        r=c["r"],
    )


def point_config(conf: dict) -> NetworkConfig:
    c = {**DEFAULTS, **conf}
    if "beta1_sq" not in c:
        raise ValueError("config needs 'beta1_sq' for a single point")
    return NetworkConfig(
        c["beta1_sq"], c["beta2_sq"], c["delta_loss_sq"],
        c.get("theta1", 0.0), c.get("theta2", 0.0), c["r"],
    )


def spec_field_names() -> list[str]:
    return [f.name for f in fields(SweepSpec)]
