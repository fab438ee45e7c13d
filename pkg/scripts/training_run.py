"""Incremental training of unrolled GD steps, exporting every generation.

Writes ``loss.csv`` (generation, T, held-out loss, spectral radius, the bound
(1/sqrt 2) sqrt(n loss)), one schedule file per generation and a sorted
learned-vs-Chebyshev comparison. ``--long`` runs n=300, m=1200 up to T=15,
which takes a long while on one core.

    python scripts/training_run.py --out runs/train
"""

import argparse
import math
from pathlib import Path

from chebgd.dugd import TrainConfig, incremental_train
from chebgd.experiments import learned_vs_chebyshev
from chebgd.linalg import generate_gaussian_problem, jacobi_eigenvalues
from chebgd.sched import GAUSSIAN_UNIT_MEAN_C, Origin, StepSchedule, spectral_radius, write_schedule


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--long", action="store_true")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--minibatches", type=int, default=500)
    ap.add_argument("--out", default="runs/train")
    args = ap.parse_args()

    n, m, T = (300, 1200, 15) if args.long else (100, 400, 8)
    problem = generate_gaussian_problem(n, m, args.seed)
    spectrum = jacobi_eigenvalues(problem)
    cfg = TrainConfig(T_max=T, seed=args.seed, minibatches_per_generation=args.minibatches)

    def progress(gen, step, gammas, loss):
        if step == cfg.minibatches_per_generation - 1:
            print(f"generation {gen}: minibatch loss {loss:.4g}", flush=True)

    result = incremental_train(problem, cfg, on_step=progress)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lmin, lmax = spectrum.lambda_min, spectrum.lambda_max
    with (out / "loss.csv").open("w") as fh:
        fh.write(f"# n={n} m={m} seed={args.seed} minibatches={cfg.minibatches_per_generation}\n")
        fh.write("generation,T,loss,spectral_radius,bound\n")
        for g, (steps, loss) in enumerate(zip(result.schedules, result.losses), 1):
            rho = spectral_radius(steps, spectrum)
            bound = GAUSSIAN_UNIT_MEAN_C * math.sqrt(n * loss)
            fh.write(f"{g},{steps.size},{loss:.17g},{rho:.17g},{bound:.17g}\n")
            with (out / f"schedule_T{steps.size:02d}.txt").open("w") as sf:
                write_schedule(sf, StepSchedule(steps, lmin, lmax, Origin.LEARNED))
    with (out / "comparison.csv").open("w") as fh:
        fh.write("index,learned_sorted,chebyshev_sorted,relative_difference\n")
        for i, g, c, r in learned_vs_chebyshev(result.schedules[-1], lmin, lmax):
            fh.write(f"{int(i)},{g:.17g},{c:.17g},{r:.17g}\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
