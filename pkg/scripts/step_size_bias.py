"""Step-size bias of the discretized filter-error recursion, without sampling.

Compares the exact stationary covariance of the discrete recursion with the
continuous Riccati solution for both integration schemes. Halving dt should
halve the Euler bias.

Usage: python3 scripts/step_size_bias.py
"""

import numpy as np

from entcool.kalman import kalman_gain, stationary_covariance
from entcool.mc import SCHEMES, discrete_error_covariance
from entcool.network import NetworkConfig
from entcool.oscillator import build_system
from entcool.sweep import optimize_phases

STEPS = (4e-3, 2e-3, 1e-3, 5e-4)


def main():
    cfg = NetworkConfig(1.0, 0.0, 0.9)
    opt = optimize_phases(cfg)
    sys = build_system(cfg.with_phases(opt.theta1, opt.theta2))
    v = stationary_covariance(sys)
    gain = kalman_gain(v, sys)
    print("relative bias of diag(V) per quadrature (q1, p1, q2, p2)")
    for scheme in SCHEMES:
        for dt in STEPS:
            rel = (np.diag(discrete_error_covariance(sys, gain, dt, scheme)) - np.diag(v.v)) / np.diag(v.v)
            print(f"{scheme:12s} dt={dt:<7g} " + "  ".join(f"{x:+.2e}" for x in rel))


if __name__ == "__main__":
    main()
