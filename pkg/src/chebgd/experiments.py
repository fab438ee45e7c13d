"""Experiment orchestration shared by the CLI and the scripts.

Each runner takes a plain dataclass config and returns arrays; writing files is
left to the caller so the same code feeds tests, scripts and the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Optional, Sequence, TextIO

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DegenerateShift, InvalidParams, SingularSystem
from .linalg import (
    QuadraticProblem,
    Spectrum,
    generate_gaussian_problem,
    jacobi_eigenvalues,
    power_method_max,
    power_method_min,
)
from .permute import AffinePermutation, is_power_of_two, permutation_search
from .sched import (
    StepSchedule,
    chebyshev_steps,
    constant_schedule,
    rate_chgd_upper,
    rate_constant,
    rate_lower_bound,
)
from .solvers import (
    Algorithm,
    BaselineParams,
    SolverTrace,
    run_cheb_semi,
    run_gd,
    run_momentum,
)

PLOT_FLOOR = 1e-300


def describe(config) -> str:
    """Flat ``key=value`` rendering of a dataclass config, in field order."""
    parts = []
    for f in fields(config):
        v = getattr(config, f.name)
        if isinstance(v, (tuple, list)):
            v = ",".join(getattr(x, "value", str(x)) for x in v)
        elif hasattr(v, "value"):
            v = v.value
        parts.append(f"{f.name}={v}")
    return " ".join(parts)


# -- benchmark ---------------------------------------------------------------

DEFAULT_ALGOS = (Algorithm.GD_CONSTANT, Algorithm.CHGD)


@dataclass(frozen=True)
class BenchConfig:
    n: int = 100
    m: int = 400
    seed: int = 0
    T: int = 15
    iters: int = 150
    samples: int = 100
    algos: tuple = DEFAULT_ALGOS
    permute: bool = False
    schedule: Optional[str] = None  # learned steps for DUGD
    semi: str = "centered"

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.T < 1 or self.iters < 0 or self.samples < 0:
            raise InvalidParams("n, m, T must be positive; iters and samples nonnegative")
        algos = tuple(Algorithm(a) for a in self.algos)
        if Algorithm.DUGD in algos and self.schedule is None:
            raise InvalidParams("DUGD needs a learned schedule file")
        object.__setattr__(self, "algos", algos)


@dataclass
class BenchResult:
    problem: QuadraticProblem
    spectrum: Spectrum
    traces: list
    rate_lines: list  # (name, t, values)
    schedules: dict = field(default_factory=dict)


def chgd_schedule(T, lambda_min, lambda_max, permute=False):
    """Chebyshev steps, optionally in the searched affine order (T a power of two)."""
    if permute and T >= 2 and is_power_of_two(T):
        found = permutation_search(lambda_min, lambda_max, T)
        return found.schedule, found.permutation, found.objective
    return chebyshev_steps(T, lambda_min, lambda_max), None, None


def rate_line(name, mse0, rate, ts) -> tuple:
    ts = np.asarray(ts, dtype=np.int64)
    return name, ts, mse0 * rate ** (2.0 * ts)


def run_bench(config: BenchConfig, learned: Optional[StepSchedule] = None) -> BenchResult:
    """Run the selected algorithms from shared N(1, I) starting points."""
    problem = generate_gaussian_problem(config.n, config.m, config.seed)
    spectrum = jacobi_eigenvalues(problem)
    lmin, lmax, kappa = spectrum.lambda_min, spectrum.lambda_max, spectrum.kappa
    rng = np.random.default_rng([config.seed, 1])
    x0 = rng.standard_normal((config.samples, config.n)) + 1.0

    schedules = {
        Algorithm.GD_CONSTANT: constant_schedule(1, lmin, lmax),
        Algorithm.CHGD: chgd_schedule(config.T, lmin, lmax, config.permute)[0],
    }
    if Algorithm.DUGD in config.algos:
        if learned is None:
            raise InvalidParams("DUGD selected but no learned schedule supplied")
        schedules[Algorithm.DUGD] = learned
    params = BaselineParams.from_bounds(lmin, lmax, semi=config.semi)

    if config.samples == 0:
        return BenchResult(problem, spectrum, [], [], schedules)

    traces = []
    for algo in config.algos:
        if algo in schedules:
            traces.append(run_gd(problem, schedules[algo], x0, config.iters, algorithm=algo))
        elif algo is Algorithm.MOMENTUM:
            traces.append(run_momentum(problem, params, x0, config.iters))
        else:
            traces.append(run_cheb_semi(problem, params, x0, config.iters))

    mse0 = traces[0].mse[0]
    ts = np.arange(0, config.iters + 1, config.T)
    lines = []
    if Algorithm.GD_CONSTANT in config.algos:
        lines.append(rate_line("GDConstant-rate", mse0, rate_constant(kappa), ts))
    if Algorithm.CHGD in config.algos:
        lines.append(rate_line("CHGD-rate", mse0, rate_chgd_upper(config.T, kappa), ts))
    if {Algorithm.MOMENTUM, Algorithm.CHEB_SEMI} & set(config.algos):
        lines.append(rate_line("lower-bound-rate", mse0, rate_lower_bound(kappa), ts))
    return BenchResult(problem, spectrum, traces, lines, schedules)


# -- ridge -------------------------------------------------------------------


@dataclass(frozen=True)
class RidgeConfig:
    eta: float = 1.0
    T: int = 32
    iters: int = 2000
    permute: bool = True
    seed: int = 0
    power_tol: float = 1e-12

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidParams("eta must be positive")
        if self.T < 1 or self.iters < 0:
            raise InvalidParams("T must be positive and iters nonnegative")


@dataclass
class RidgeResult:
    problem: QuadraticProblem
    reference: np.ndarray
    lambda_min_est: float
    lambda_max_est: float
    schedule: StepSchedule
    permutation: Optional[AffinePermutation]
    objective: Optional[float]
    traces: list


def reference_solution(problem: QuadraticProblem) -> np.ndarray:
    """Direct Cholesky solve of ``A beta = b``; only used to measure errors."""
    try:
        factor = cho_factor(problem.matrix_a, lower=True, check_finite=True)
    except LinAlgError as exc:
        raise SingularSystem(f"ridge matrix is not numerically positive definite: {exc}") from None
    beta = cho_solve(factor, problem.rhs)
    if not np.all(np.isfinite(beta)):
        raise SingularSystem("direct solve produced non-finite values")
    return beta


def ridge_problem(h, y, eta: float) -> QuadraticProblem:
    if not eta > 0:
        raise InvalidParams("eta must be positive")
    return QuadraticProblem.from_gram(h, eta, y)


def run_ridge(problem: QuadraticProblem, config: RidgeConfig) -> RidgeResult:
    """GDConstant, CHGD and Momentum from zero, with eigenvalue bounds from power iteration."""
    reference = reference_solution(problem)
    lmax = power_method_max(problem, tol=config.power_tol, seed=config.seed)
    try:
        lmin = power_method_min(problem, lmax, tol=config.power_tol, seed=config.seed)
    except DegenerateShift:
        lmin = lmax  # A = lambda I: every method below solves it in one step
    if not 0 < lmin <= lmax:
        raise SingularSystem(f"estimated smallest eigenvalue {lmin:.3g} is not positive")
    if lmin < lmax:
        schedule, perm, objective = chgd_schedule(config.T, lmin, lmax, config.permute)
    else:
        schedule, perm, objective = constant_schedule(1, lmin, lmax), None, None
    params = BaselineParams.from_bounds(lmin, lmax)
    x0 = np.zeros(problem.dim)
    kw = dict(reference=reference)
    traces = [
        run_gd(problem, constant_schedule(1, lmin, lmax), x0, config.iters, **kw),
        run_gd(problem, schedule, x0, config.iters, algorithm=Algorithm.CHGD, **kw),
        run_momentum(problem, params, x0, config.iters, **kw),
    ]
    return RidgeResult(problem, reference, lmin, lmax, schedule, perm, objective, traces)


def first_hit(trace: SolverTrace, level: float) -> Optional[int]:
    """First recorded iteration whose MSE is at or below ``level``."""
    idx = np.flatnonzero(trace.mse <= level)
    return int(trace.t[idx[0]]) if idx.size else None


def synthetic_ridge_data(
    n: int = 98,
    m: int = 1994,
    seed: int = 0,
    decades: float = 2.0,
    isolated: float = 1e-5,
    noise: float = 0.1,
):
    """Design with a prescribed ill-conditioned Gram spectrum, plus a noisy linear response.

    The Gram eigenvalues are ``m`` times a log-spaced bulk spanning ``decades``
    orders of magnitude together with one isolated bottom value at ``isolated``
    (relative to the top). Returns ``(H, y, gram_eigenvalues)``.
    """
    if n < 2 or m < n:
        raise InvalidParams("need n >= 2 and m >= n")
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((m, n)))
    v, _ = np.linalg.qr(rng.standard_normal((n, n)))
    bulk = np.logspace(0.0, -decades, n - 1)
    eig = float(m) * np.concatenate([bulk, [isolated]])
    h = (u * np.sqrt(eig)) @ v.T
    beta = rng.standard_normal(n)
    y = h @ beta + noise * rng.standard_normal(m)
    return h, y, np.sort(eig)


# -- plot data ---------------------------------------------------------------


def emit_plot_data(stream: TextIO, series: Sequence[tuple], comment: Optional[str] = None) -> None:
    """Whitespace-separated ``t value`` blocks, one per series, separated by blank lines.

    Values at or below zero are clamped to a tiny positive floor so log axes
    never see zero; a closing comment says how many were clamped.
    """
    if comment is not None:
        stream.write(f"# {comment}\n")
    clamped = 0
    for i, (name, ts, values) in enumerate(series):
        if i:
            stream.write("\n\n")
        stream.write(f"# series: {name}\n")
        for t, v in zip(ts, values):
            if not v > 0:
                v = PLOT_FLOOR
                clamped += 1
            stream.write(f"{int(t)} {v:.17g}\n")
    if clamped:
        stream.write(f"# note: {clamped} nonpositive values clamped to {PLOT_FLOOR:g}\n")


def trace_series(traces) -> list:
    return [(tr.algorithm.value, tr.t, tr.mse) for tr in traces]


def write_rate_lines_csv(stream: TextIO, lines, comment: Optional[str] = None) -> None:
    if comment is not None:
        stream.write(f"# {comment}\n")
    stream.write("series,t,value\n")
    for name, ts, values in lines:
        for t, v in zip(ts, values):
            stream.write(f"{name},{int(t)},{v:.17g}\n")


def learned_vs_chebyshev(learned, lambda_min: float, lambda_max: float) -> np.ndarray:
    """Rows ``(index, sorted learned, sorted Chebyshev, relative difference)``."""
    g = np.sort(np.asarray(learned, dtype=float))
    ch = np.sort(chebyshev_steps(g.size, lambda_min, lambda_max).steps)
    return np.column_stack([np.arange(g.size), g, ch, (g - ch) / ch])

