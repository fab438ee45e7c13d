"""Momentum and Chebyshev semi-iterative baselines next to CHGD on a Gaussian problem.

Prints the fitted log-MSE slopes against their theoretical rates and writes the
traces as plot data.

    python scripts/baselines.py --n 100 --m 150 --out runs/baselines
"""

import argparse
import math
from pathlib import Path

from chebgd.experiments import BenchConfig, emit_plot_data, run_bench, trace_series, describe
from chebgd.sched import rate_chgd_upper, rate_lower_bound
from chebgd.solvers import Algorithm, log_slope


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--m", type=int, default=150)
    ap.add_argument("--T", type=int, default=16)
    ap.add_argument("--iters", type=int, default=600)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--semi", choices=("centered", "normalized"), default="centered")
    ap.add_argument("--out", default="runs/baselines")
    args = ap.parse_args()

    cfg = BenchConfig(n=args.n, m=args.m, seed=args.seed, T=args.T, iters=args.iters, samples=20,
                      algos=(Algorithm.CHGD, Algorithm.MOMENTUM, Algorithm.CHEB_SEMI), semi=args.semi)
    res = run_bench(cfg)
    kappa = res.spectrum.kappa
    lo, hi = args.iters // 3, args.iters
    low = 2 * math.log(rate_lower_bound(kappa))
    print(f"kappa {kappa:.2f}; slope window [{lo}, {hi}]")
    for tr in res.traces:
        slope = log_slope(tr, lo, hi, every=args.T if tr.algorithm is Algorithm.CHGD else 1)
        print(f"{tr.algorithm.value:10s} slope {slope:.5f}  ratio to lower bound {slope / low:.3f}")
    print(f"CHGD per-step bound ratio {2 * math.log(rate_chgd_upper(args.T, kappa)) / low:.3f}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "plot.dat").open("w") as fh:
        emit_plot_data(fh, trace_series(res.traces), describe(cfg))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
