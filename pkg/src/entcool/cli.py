"""Command-line front end: ``sweep``, ``point``, ``validate`` and ``mc-check``."""

from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from .gaussian import validate_system
from .kalman import stationary_covariance, unconditional_covariance
from .mc import SCHEMES, monte_carlo_check
from .network import NetworkConfig
from .oscillator import build_system, energy_weight
from .lqg import cheap_bound
from .riccati import ConvergenceError
from .sweep import (
    emit_csv,
    load_config,
    model_from_config,
    optimize_phases,
    point_config,
    run_sweep,
    spec_from_config,
)

log = logging.getLogger("entcool")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ROWS_FAILED = 2


def _resolve_point(conf: dict) -> tuple[NetworkConfig, bool]:
    """Network configuration from a config; phases are optimized when absent."""
    cfg = point_config(conf)
    if "theta1" in conf and "theta2" in conf:
        return cfg, False
    opt = optimize_phases(
        cfg,
        conf.get("phase_grid", 24),
        conf.get("refine_iters", 30),
        model_from_config(conf),
    )
    return cfg.with_phases(opt.theta1, opt.theta2), True


def cmd_sweep(args) -> int:
    conf = load_config(args.config)
    spec = spec_from_config(conf)
    output = args.output or conf.get("output")
    if not output:
        log.error("no output path: pass --output or set 'output' in the config")
        return EXIT_FAILED
    t0 = time.perf_counter()
    result = run_sweep(spec, workers=args.threads)
    emit_csv(result, output)
    failed = sum(not r.converged for r in result.rows)
    log.info(
        "wrote %d rows to %s in %.1f s (%d failed)",
        len(result.rows), output, time.perf_counter() - t0, failed,
    )
    return EXIT_OK if failed == 0 else EXIT_ROWS_FAILED


def cmd_point(args) -> int:
    conf = load_config(args.config)
    cfg, optimized = _resolve_point(conf)
    params = model_from_config(conf)
    system = build_system(cfg, params)
    v = stationary_covariance(system)
    v_unc = unconditional_covariance(system)
    cb = cheap_bound(v, energy_weight())
    gap = np.linalg.eigvalsh(v_unc.v - v.v).min()
    print(f"beta1_sq      {cfg.beta1_sq:.10g}")
    print(f"beta2_sq      {cfg.beta2_sq:.10g}")
    print(f"delta_sq      {cfg.delta_sq:.10g}")
    print(f"theta1        {cfg.theta1:.10g}{'  (optimized)' if optimized else ''}")
    print(f"theta2        {cfg.theta2:.10g}{'  (optimized)' if optimized else ''}")
    print(f"e_min         {(cb - 1) / 2:.10g}")
    print(f"cheap_bound   {cb:.10g}")
    print(f"residual      {v.residual:.3e}")
    print(f"min eig V+iS/2 {v.uncertainty_eigenvalues().min():.3e}")
    print(f"min eig Vu-V  {gap:.3e}")
    print(f"max Re eig A  {np.linalg.eigvals(system.drift).real.max():.6g}")
    return EXIT_OK if v.residual <= 1e-10 else EXIT_FAILED


def cmd_validate(args) -> int:
    conf = load_config(args.config) if args.config else {}
    params = model_from_config(conf)
    cfg = point_config({"beta1_sq": 1.0, **conf})
    problems = validate_system(build_system(cfg, params, bath=False))
    system = build_system(cfg, params)
    hurwitz = np.linalg.eigvals(system.drift).real.max()
    if hurwitz >= 0:
        problems.append(f"drift not Hurwitz (max Re eig {hurwitz:.3g})")
    try:
        v = stationary_covariance(system)
        problems.extend(v.violations())
    except (ConvergenceError, ValueError) as exc:
        problems.append(f"stationary covariance failed: {exc}")
    for p in problems:
        print(f"FAIL {p}")
    if not problems:
        print("PASS structural checks")
    return EXIT_OK if not problems else EXIT_FAILED


def cmd_mc_check(args) -> int:
    conf = load_config(args.config)
    cfg, _ = _resolve_point(conf)
    system = build_system(cfg, model_from_config(conf))
    t0 = time.perf_counter()
    report = monte_carlo_check(
        system,
        n_traj=args.trajectories,
        dt=args.dt,
        seed=args.seed,
        threads=args.threads,
        scheme=args.scheme,
    )
    for line in report.lines():
        print(line)
    print(
        f"{'PASS' if report.passed else 'FAIL'} overall: max covariance dev "
        f"{report.v_z.max():.2f} se over {report.n_traj} trajectories "
        f"({time.perf_counter() - t0:.1f} s)"
    )
    return EXIT_OK if report.passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entcool", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="sweep beta1^2 with phase optimization, write CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--output")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("point", help="evaluate one configuration")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("validate", help="structural checks on the model")
    p.add_argument("--config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("mc-check", help="Monte Carlo check of the stationary covariance")
    p.add_argument("--config", required=True)
    p.add_argument("--trajectories", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--scheme", choices=SCHEMES, default="euler", help="drift integrator")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_mc_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    if getattr(args, "threads", 1) < 1:
        log.error("--threads must be at least 1")
        return EXIT_FAILED
    try:
        return args.func(args)
    except (OSError, ValueError, ConvergenceError) as exc:
        log.error("%s", exc)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
