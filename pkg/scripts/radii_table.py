"""Print spectral radii of constant and Chebyshev schedules on Gaussian Gram spectra.

    python scripts/radii_table.py --n 300 --m 1200 --T 6 --seeds 10
"""

import argparse

from chebgd.linalg import generate_gaussian_problem, jacobi_eigenvalues, marchenko_pastur_edges
from chebgd.sched import cheb_upper_closed_form, chebyshev_steps, constant_schedule, spectral_radius


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--m", type=int, default=1200)
    ap.add_argument("--T", type=int, default=6)
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()

    lo, hi = marchenko_pastur_edges(args.n, args.m)
    print(f"limit edges [{lo:.4f}, {hi:.4f}]")
    print(f"constant step on the limit edges: {spectral_radius(constant_schedule(args.T, lo, hi), [lo, hi]):.6f}")
    print(f"Chebyshev bound on the limit edges: {cheb_upper_closed_form(args.T, hi / lo):.6f}")
    print("seed  lambda_min  lambda_max  constant  chebyshev")
    for seed in range(args.seeds):
        s = jacobi_eigenvalues(generate_gaussian_problem(args.n, args.m, seed))
        const = spectral_radius(constant_schedule(args.T, s.lambda_min, s.lambda_max), s)
        cheb = spectral_radius(chebyshev_steps(args.T, s.lambda_min, s.lambda_max), s)
        print(f"{seed:4d}  {s.lambda_min:10.4f}  {s.lambda_max:10.4f}  {const:8.4f}  {cheb:9.4f}")


if __name__ == "__main__":
    main()
