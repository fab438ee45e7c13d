"""Temporal spectral radius of Chebyshev step orderings, plus the affine-search table.

For every (kappa, T) pair the table lists the natural (ascending-step) order, the
reversed order and the best affine permutation. With ``--trace`` it also runs GD
with the reversed order and writes per-iteration MSE, showing the transient blow-up
inside each period.

    python scripts/step_orderings.py --trace runs/orderings.dat
"""

import argparse

import numpy as np

from chebgd.experiments import emit_plot_data
from chebgd.linalg import generate_gaussian_problem, jacobi_eigenvalues
from chebgd.permute import permutation_search, temporal_spectral_radius
from chebgd.sched import chebyshev_steps
from chebgd.solvers import run_gd


def table(kappas, periods):
    print(f"{'kappa':>8} {'T':>4} {'natural':>12} {'reversed':>12} {'searched':>12}  triple")
    for kappa in kappas:
        for T in periods:
            natural = chebyshev_steps(T, 1.0, kappa)
            reversed_ = natural.reordered(np.arange(T)[::-1])
            found = permutation_search(1.0, kappa, T)
            p = found.permutation
            print(f"{kappa:8g} {T:4d} {temporal_spectral_radius(natural):12.4g} "
                  f"{temporal_spectral_radius(reversed_):12.4g} {found.objective:12.4g}  "
                  f"({p.a},{p.b},{p.c})")


def trace(path, n=60, m=120, T=16, periods=4, seed=0):
    problem = generate_gaussian_problem(n, m, seed)
    s = jacobi_eigenvalues(problem)
    natural = chebyshev_steps(T, s.lambda_min, s.lambda_max)
    orders = {"natural": natural, "reversed": natural.reordered(np.arange(T)[::-1])}
    x0 = np.random.default_rng([seed, 1]).normal(1.0, 1.0, (20, n))
    series = []
    for name, sched in orders.items():
        tr = run_gd(problem, sched, x0, periods * T)
        series.append((name, tr.t, tr.mse))
    with open(path, "w") as fh:
        emit_plot_data(fh, series, f"n={n} m={m} T={T} kappa={s.kappa:.4g}")
    print(f"wrote {path}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kappas", default="4,16,64,256")
    ap.add_argument("--periods", default="4,8,16,32")
    ap.add_argument("--trace", help="write an MSE trace comparing the two simple orders")
    args = ap.parse_args()
    table([float(k) for k in args.kappas.split(",")], [int(t) for t in args.periods.split(",")])
    if args.trace:
        trace(args.trace)


if __name__ == "__main__":
    main()
