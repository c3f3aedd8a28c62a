"""Run the three reference reflectivity sweeps and summarize them.

Usage: python3 scripts/run_sweeps.py [--out DIR] [--threads N]
"""

import argparse
import logging
import time
from pathlib import Path

import numpy as np

from entcool.sweep import emit_csv, load_config, run_sweep, spec_from_config

CONFIGS = ("local_loss09.cfg", "global_loss09.cfg", "local_loss01.cfg")
ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for name in CONFIGS:
        conf = load_config(ROOT / "configs" / name)
        t0 = time.perf_counter()
        result = run_sweep(spec_from_config(conf), workers=args.threads)
        path = emit_csv(result, out / conf["output"])
        e = result.column("e_min")
        k = int(np.argmin(e))
        print(
            f"{name:20s} E_min(beta1^2=1)={e[-1]:.4f}  min {e[k]:.4f} at beta1^2={result.rows[k].beta1_sq:.2f}  "
            f"E_min(0)={e[0]:.4f}  converged={result.all_converged}  {time.perf_counter() - t0:.1f} s  -> {path}"
        )


if __name__ == "__main__":
    main()
