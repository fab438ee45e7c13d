"""Command-line front end: ``chebgd {steps,bench,train,ridge,eig}``.

Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines, then explicit flags. Every CSV written starts with a
comment holding the fully resolved settings, and nothing time-dependent is
written, so a fixed config reproduces byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import experiments as ex
from .data import load_dataset
from .dugd import InitDistribution, TrainConfig, incremental_train
from .errors import (
    ChebGDError,
    ConfigError,
    DataError,
    DegenerateShift,
    DegenerateSpectrum,
    InvalidParams,
    NonConvergence,
    SingularSystem,
    SizeLimitExceeded,
)
from .linalg import (
    Spectrum,
    generate_gaussian_problem,
    jacobi_eigenvalues,
    power_method_max,
    power_method_min,
    read_matrix,
)
from .permute import is_power_of_two, permutation_search
from .sched import (
    Origin,
    StepSchedule,
    chebyshev_steps,
    read_schedule,
    spectral_radius,
    write_schedule,
)
from .solvers import write_traces_csv

log = logging.getLogger("chebgd")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _algos(text):
    if isinstance(text, tuple):
        return text
    return tuple(a.strip() for a in str(text).split(",") if a.strip())


# name -> (converter, default, help); names map to --flag-with-dashes
COMMON = {"seed": (int, 0, "random seed")}
OPTIONS = {
    "steps": {
        "T": (int, 6, "schedule length"),
        "lambda_min": (float, 1.0, "smallest eigenvalue bound"),
        "lambda_max": (float, 9.0, "largest eigenvalue bound"),
        "permute": (_bool, False, "reorder by affine permutation search"),
    },
    "bench": {
        "n": (int, 100, "dimension"),
        "m": (int, 400, "rows of the Gaussian factor"),
        "T": (int, 15, "Chebyshev period"),
        "iters": (int, 150, "iterations"),
        "samples": (int, 100, "number of shared starting points"),
        "algos": (_algos, "GDConstant,CHGD", "comma list of GDConstant,CHGD,DUGD,Momentum,ChebSemi"),
        "permute": (_bool, False, "use the searched order for CHGD"),
        "schedule": (str, None, "learned schedule file for DUGD"),
        "semi": (str, "centered", "semi-iteration variant: centered or normalized"),
    },
    "train": {
        "n": (int, 100, "dimension"),
        "m": (int, 400, "rows of the Gaussian factor"),
        "matrix": (str, None, "problem file instead of a generated problem"),
        "T": (int, 8, "final unrolled depth"),
        "minibatches": (int, 500, "minibatches per generation"),
        "batch_size": (int, 200, "minibatch size"),
        "lr": (float, 0.002, "Adam learning rate"),
        "init_gamma": (float, 0.3, "initial value of each new step"),
        "eval_samples": (int, 10_000, "held-out samples for the recorded loss"),
        "init": (str, "GaussianUnitMeanUnitVar", "initial-point law"),
    },
    "ridge": {
        "data": (str, None, "CSV file; omit for a synthetic ill-conditioned stand-in"),
        "response": (str, "-1", "response column index or header name"),
        "missing": (str, "?", "missing-value marker"),
        "row_drop": (_bool, False, "drop rows with missing values instead of columns"),
        "standardize": (_bool, False, "standardize features before forming the Gram matrix"),
        "eta": (float, None, "ridge parameter (synthetic default: 1e-3 of the top eigenvalue)"),
        "T": (int, 32, "Chebyshev period"),
        "iters": (int, 2000, "iterations"),
        "permute": (_bool, True, "use the searched order for CHGD"),
    },
    "eig": {
        "n": (int, 100, "dimension"),
        "m": (int, 400, "rows of the Gaussian factor"),
        "matrix": (str, None, "problem file instead of a generated problem"),
        "method": (str, "jacobi", "jacobi or power"),
    },
}


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment. Dashes in keys become underscores."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _resolve(command: str, flags: dict) -> dict:
    spec = {**COMMON, **OPTIONS[command]}
    raw = {k: d for k, (_, d, _) in spec.items()}
    if flags.get("config"):
        for key, value in read_config(flags["config"]).items():
            if key not in spec:
                raise ConfigError(f"unknown setting {key!r} for {command}")
            raw[key] = value
    for key in spec:
        if flags.get(key) is not None:
            raw[key] = flags[key]
    resolved = {}
    for key, (conv, _, _) in spec.items():
        value = raw[key]
        try:
            resolved[key] = value if value is None else conv(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None
    for key in ("schedule", "matrix", "data"):
        if resolved.get(key) and not Path(resolved[key]).is_file():
            raise ConfigError(f"{key} file not found: {resolved[key]}")
    return resolved


def _render(command: str, settings: dict) -> str:
    parts = [f"command={command}"]
    for k, v in settings.items():
        if isinstance(v, tuple):
            v = ",".join(v)
        parts.append(f"{k}={v}")
    return " ".join(parts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chebgd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for command, opts in OPTIONS.items():
        p = sub.add_parser(command)
        p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
        p.add_argument("--config", help="key = value settings file")
        p.add_argument("--out", help="output file (steps, eig) or directory (bench, train, ridge)")
        for key, (conv, default, help_) in {**COMMON, **opts}.items():
            flag = "--" + key.replace("_", "-")
            if conv is _bool:
                p.add_argument(flag, dest=key, action=argparse.BooleanOptionalAction, default=None,
                               help=f"{help_} (default {default})")
            else:
                p.add_argument(flag, dest=key, default=None, help=f"{help_} (default {default})")
    return parser


def _open_out(path: Optional[str]):
    if path is None:
        return _NoClose(sys.stdout)
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    return target.open("w", newline="")


class _NoClose:
    def __init__(self, stream):
        self.stream = stream

    def __enter__(self):
        return self.stream

    def __exit__(self, *exc):
        self.stream.flush()


def _out_dir(path: Optional[str], fallback: str) -> Path:
    d = Path(path or fallback)
    d.mkdir(parents=True, exist_ok=True)
    return d


# -- commands ----------------------------------------------------------------


def cmd_steps(s: dict, out: Optional[str]) -> None:
    T = s["T"]
    if not 0 < s["lambda_min"] < s["lambda_max"]:
        raise ConfigError("need 0 < lambda_min < lambda_max")
    trailer = [_render("steps", s)]
    if s["permute"] and not (T >= 2 and is_power_of_two(T)):
        log.warning("T=%d is not a power of two; affine search skipped, natural order written", T)
        schedule = chebyshev_steps(T, s["lambda_min"], s["lambda_max"])
    elif s["permute"]:
        found = permutation_search(s["lambda_min"], s["lambda_max"], T)
        schedule = found.schedule
        p = found.permutation
        trailer.append(f"permutation a={p.a} b={p.b} c={p.c} objective={found.objective:.17g}")
    else:
        schedule = chebyshev_steps(T, s["lambda_min"], s["lambda_max"])
    with _open_out(out) as fh:
        write_schedule(fh, schedule, trailer)


def cmd_bench(s: dict, out: Optional[str]) -> None:
    cfg = ex.BenchConfig(
        n=s["n"], m=s["m"], seed=s["seed"], T=s["T"], iters=s["iters"], samples=s["samples"],
        algos=s["algos"], permute=s["permute"], schedule=s["schedule"], semi=s["semi"],
    )
    learned = read_schedule(s["schedule"]) if s["schedule"] else None
    res = ex.run_bench(cfg, learned)
    d = _out_dir(out, "bench_out")
    header = _render("bench", s)
    with (d / "traces.csv").open("w", newline="") as fh:
        write_traces_csv(fh, res.traces, header)
    with (d / "rates.csv").open("w", newline="") as fh:
        ex.write_rate_lines_csv(fh, res.rate_lines, header)
    with (d / "plot.dat").open("w", newline="") as fh:
        ex.emit_plot_data(fh, ex.trace_series(res.traces) + list(res.rate_lines), header)
    log.info("bench: kappa=%.6g, %d traces written to %s", res.spectrum.kappa, len(res.traces), d)


def _problem_from(s: dict):
    if s.get("matrix"):
        return read_matrix(s["matrix"])
    return generate_gaussian_problem(s["n"], s["m"], s["seed"])


def cmd_train(s: dict, out: Optional[str]) -> None:
    problem = _problem_from(s)
    spectrum = jacobi_eigenvalues(problem)
    cfg = TrainConfig(
        T_max=s["T"], minibatches_per_generation=s["minibatches"], batch_size=s["batch_size"],
        learning_rate=s["lr"], init_gamma=s["init_gamma"], seed=s["seed"],
        init_distribution=InitDistribution(s["init"]), eval_samples=s["eval_samples"],
    )
    result = incremental_train(problem, cfg)
    d = _out_dir(out, "train_out")
    header = _render("train", s)
    lmin, lmax = spectrum.lambda_min, spectrum.lambda_max
    with (d / "loss.csv").open("w", newline="") as fh:
        fh.write(f"# {header}\n")
        fh.write("generation,T,loss,spectral_radius\n")
        for g, (steps, loss) in enumerate(zip(result.schedules, result.losses), 1):
            rho = spectral_radius(steps, spectrum)
            fh.write(f"{g},{steps.size},{loss:.17g},{rho:.17g}\n")
            with (d / f"schedule_T{steps.size:02d}.txt").open("w", newline="") as sf:
                write_schedule(sf, StepSchedule(steps, lmin, lmax, Origin.LEARNED), [header])
    with (d / "comparison.csv").open("w", newline="") as fh:
        fh.write(f"# {header}\n")
        fh.write("index,learned_sorted,chebyshev_sorted,relative_difference\n")
        for i, g, c, r in ex.learned_vs_chebyshev(result.schedules[-1], lmin, lmax):
            fh.write(f"{int(i)},{g:.17g},{c:.17g},{r:.17g}\n")


def cmd_ridge(s: dict, out: Optional[str]) -> None:
    if s["data"]:
        resp = s["response"]
        try:
            resp = int(resp)
        except ValueError:
            pass
        dataset = load_dataset(s["data"], resp, s["missing"], row_drop=s["row_drop"])
        if s["standardize"]:
            dataset = dataset.standardized()
        h, y = dataset.design, dataset.response
        for line in dataset.log:
            log.info("data: %s", line)
        eta = s["eta"]
        if eta is None:
            raise ConfigError("eta is required with a data file")
    else:
        h, y, eig = ex.synthetic_ridge_data(seed=s["seed"])
        eta = s["eta"] if s["eta"] is not None else 1e-3 * eig[-1]
    s = {**s, "eta": eta}
    cfg = ex.RidgeConfig(eta=eta, T=s["T"], iters=s["iters"], permute=s["permute"], seed=s["seed"])
    res = ex.run_ridge(ex.ridge_problem(h, y, eta), cfg)
    d = _out_dir(out, "ridge_out")
    header = _render("ridge", s)
    with (d / "traces.csv").open("w", newline="") as fh:
        write_traces_csv(fh, res.traces, header)
    with (d / "plot.dat").open("w", newline="") as fh:
        ex.emit_plot_data(fh, ex.trace_series(res.traces), header)
    with (d / "summary.txt").open("w", newline="") as fh:
        fh.write(f"# {header}\n")
        fh.write(f"n {h.shape[1]}\nm {h.shape[0]}\n")
        fh.write(f"lambda_max_estimate {res.lambda_max_est:.17g}\n")
        fh.write(f"lambda_min_estimate {res.lambda_min_est:.17g}\n")
        fh.write(f"kappa_estimate {res.lambda_max_est / res.lambda_min_est:.17g}\n")
        if res.permutation is not None:
            p = res.permutation
            fh.write(f"permutation {p.a} {p.b} {p.c} objective {res.objective:.17g}\n")
        for tr in res.traces:
            hit = ex.first_hit(tr, 1e-8)
            fh.write(f"first_iteration_below_1e-8 {tr.algorithm.value} {'none' if hit is None else hit}\n")


def cmd_eig(s: dict, out: Optional[str]) -> None:
    problem = _problem_from(s)
    method = s["method"]
    if method == "jacobi":
        spectrum = jacobi_eigenvalues(problem)
    elif method == "power":
        lmax = power_method_max(problem, seed=s["seed"])
        spectrum = Spectrum.from_bounds(power_method_min(problem, lmax, seed=s["seed"]), lmax)
    else:
        raise ConfigError(f"unknown method {method!r}")
    with _open_out(out) as fh:
        fh.write(f"# {_render('eig', s)}\n")
        fh.write(f"lambda_min {spectrum.lambda_min:.17g}\n")
        fh.write(f"lambda_max {spectrum.lambda_max:.17g}\n")
        fh.write(f"kappa {spectrum.kappa:.17g}\n")
        if method == "jacobi":
            fh.write("eigenvalues\n")
            for v in spectrum.eigenvalues:
                fh.write(f"{v:.17g}\n")


COMMANDS = {"steps": cmd_steps, "bench": cmd_bench, "train": cmd_train,
            "ridge": cmd_ridge, "eig": cmd_eig}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (DataError, OSError)):
        return EXIT_DATA
    if isinstance(exc, (NonConvergence, SingularSystem, DegenerateShift, DegenerateSpectrum,
                        SizeLimitExceeded, FloatingPointError)):
        return EXIT_NUMERIC
    if isinstance(exc, (ConfigError, InvalidParams, ValueError)):
        return EXIT_CONFIG
    return EXIT_NUMERIC if isinstance(exc, ChebGDError) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    flags = vars(args)
    try:
        settings = _resolve(args.command, flags)
        with np.errstate(over="ignore"):
            COMMANDS[args.command](settings, args.out)
    except (ChebGDError, OSError, ValueError) as exc:
        code = exit_code_for(exc)
        print(f"chebgd {args.command}: {exc}", file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
