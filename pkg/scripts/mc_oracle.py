"""Monte Carlo check of the stationary filter covariance at three working points:
the coherent-only point, the best row of a local sweep and a lossy entangled point.

Usage: python3 scripts/mc_oracle.py [--trajectories N] [--dt DT] [--scheme euler|exponential]
"""

import argparse
import logging
import time

from entcool.mc import SCHEMES, monte_carlo_check
from entcool.network import NetworkConfig
from entcool.oscillator import build_system
from entcool.sweep import SweepSpec, optimize_phases, run_sweep


def optimized(cfg):
    opt = optimize_phases(cfg)
    return cfg.with_phases(opt.theta1, opt.theta2)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trajectories", type=int, default=2000)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--scheme", choices=SCHEMES, default="euler")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    grid = tuple(i / 100 for i in range(101))
    best = min(run_sweep(SweepSpec(beta1_sq_grid=grid)).rows, key=lambda r: r.e_min)
    points = {
        "coherent only": optimized(NetworkConfig(1.0, 0.0, 0.9)),
        "entangled optimum": NetworkConfig(best.beta1_sq, 0.0, 0.9, best.theta1_opt, best.theta2_opt),
        "lossy entangled": optimized(NetworkConfig(0.5, 0.2, 0.5)),
    }
    for seed, (name, cfg) in enumerate(points.items()):
        t0 = time.perf_counter()
        report = monte_carlo_check(
            build_system(cfg), n_traj=args.trajectories, dt=args.dt, seed=seed,
            threads=args.threads, scheme=args.scheme,
        )
        print(f"== {name} (beta1^2={cfg.beta1_sq:.2f}, {time.perf_counter() - t0:.0f} s)")
        for line in report.lines():
            print("  " + line)


if __name__ == "__main__":
    main()
