"""Gradient descent with step schedules, and the momentum / Chebyshev semi-iterative baselines.

All solvers iterate the residual form ``x <- x - gamma (A x - b)``; ``b`` is the
problem target (zero for the canonical problem). ``x0`` may be a single vector
of shape (n,) or a batch of shape (k, n); recorded MSE is the batch mean of
``||x - reference||^2 / n``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO

import numpy as np

from .errors import DegenerateSpectrumWarning, DimensionMismatch, InvalidParams, ScheduleEmpty
from .linalg import QuadraticProblem
from .sched import Origin, StepSchedule, rate_lower_bound


class Algorithm(str, enum.Enum):
    GD_CONSTANT = "GDConstant"
    CHGD = "CHGD"
    DUGD = "DUGD"
    MOMENTUM = "Momentum"
    CHEB_SEMI = "ChebSemi"


_ORIGIN_LABEL = {
    Origin.CONSTANT_OPTIMAL: Algorithm.GD_CONSTANT,
    Origin.CHEBYSHEV: Algorithm.CHGD,
    Origin.PERMUTED: Algorithm.CHGD,
    Origin.LEARNED: Algorithm.DUGD,
    Origin.CUSTOM: Algorithm.GD_CONSTANT,
}


@dataclass
class SolverTrace:
    algorithm: Algorithm
    t: np.ndarray
    mse: np.ndarray
    schedule_period: Optional[int] = None
    iterates: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self):
        return self.t.size

    def at(self, t: int) -> float:
        idx = np.searchsorted(self.t, t)
        if idx >= self.t.size or self.t[idx] != t:
            raise KeyError(f"iteration {t} was not recorded")
        return float(self.mse[idx])


@dataclass(frozen=True)
class BaselineParams:
    """Momentum and Chebyshev semi-iterative coefficients.

    ``semi_scale`` multiplies ``A`` inside the semi-iterative update, and ``xi``
    bounds the spectral radius of ``I - semi_scale * A``.
    """

    gamma_prime: float
    beta: float
    xi: float
    semi_scale: float

    def __post_init__(self):
        if not (self.gamma_prime > 0 and self.semi_scale > 0):
            raise InvalidParams("gamma_prime and semi_scale must be positive")
        if not (0 <= self.beta < 1 and 0 <= self.xi < 1):
            raise InvalidParams("beta and xi must lie in [0, 1)")

    @classmethod
    def from_bounds(
        cls, lambda_min: float, lambda_max: float, semi: str = "centered"
    ) -> "BaselineParams":
        """Coefficients for eigenvalues in [lambda_min, lambda_max].

        ``semi="centered"`` runs the semi-iteration on ``I - 2A/(lambda_min + lambda_max)``
        with ``xi = (kappa - 1)/(kappa + 1)``, whose asymptotic rate equals
        ``(sqrt(kappa) - 1)/(sqrt(kappa) + 1)``. ``semi="normalized"`` uses
        ``I - A/lambda_max`` with ``xi = 1 - 1/kappa``.
        """
        if not (0 < lambda_min <= lambda_max):
            raise InvalidParams("need 0 < lambda_min <= lambda_max")
        kappa = lambda_max / lambda_min
        gamma_prime = 4.0 / (math.sqrt(lambda_min) + math.sqrt(lambda_max)) ** 2
        beta = rate_lower_bound(kappa) ** 2
        if semi == "centered":
            xi = (kappa - 1.0) / (kappa + 1.0)
            scale = 2.0 / (lambda_min + lambda_max)
        elif semi == "normalized":
            xi = 1.0 - 1.0 / kappa
            scale = 1.0 / lambda_max
        else:
            raise InvalidParams(f"unknown semi-iteration variant {semi!r}")
        return cls(gamma_prime, beta, xi, scale)


def cheb_semi_coefficients(xi: float, count: int) -> np.ndarray:
    """``gamma'_1 .. gamma'_count`` of the semi-iterative recursion."""
    out = np.empty(count)
    if count == 0:
        return out
    out[0] = 1.0
    if count > 1:
        out[1] = 2.0 / (2.0 - xi * xi)
    for k in range(2, count):
        out[k] = 4.0 / (4.0 - xi * xi * out[k - 1])
    return out


class _Recorder:
    def __init__(self, n, reference, stride, keep_iterates):
        self.ref = np.zeros(n) if reference is None else np.asarray(reference, dtype=float)
        if self.ref.shape != (n,):
            raise DimensionMismatch(f"reference must have shape ({n},)")
        self.stride = max(int(stride), 1)
        self.keep = keep_iterates
        self.t, self.mse, self.iterates = [], [], []

    def __call__(self, t, x):
        if t % self.stride:
            return
        self.t.append(t)
        self.mse.append(_mse(x, self.ref))
        if self.keep:
            self.iterates.append(x.copy())

    def trace(self, algorithm, period=None):
        iterates = np.array(self.iterates) if self.keep else None
        return SolverTrace(
            Algorithm(algorithm),
            np.array(self.t, dtype=np.int64),
            np.array(self.mse, dtype=float),
            period,
            iterates,
        )


def _mse(x, ref):
    d = x - ref
    n = ref.shape[0]
    if d.ndim == 1:
        return float(d @ d) / n
    return float(np.mean(np.einsum("ij,ij->i", d, d))) / n


def _start(problem: QuadraticProblem, x0):
    x = np.array(x0, dtype=float, copy=True)
    if x.shape[-1] != problem.dim or x.ndim not in (1, 2):
        raise DimensionMismatch(f"x0 must have shape ({problem.dim},) or (k, {problem.dim})")
    return x


def _residual(a, b, x):
    # rows of a batch are samples; A is symmetric so x @ A == (A x^T)^T
    return x @ a - b


def run_gd(
    problem: QuadraticProblem,
    schedule,
    x0,
    total_iters: int,
    cyclic: bool = True,
    *,
    stride: int = 1,
    reference=None,
    keep_iterates: bool = False,
    algorithm: Optional[Algorithm] = None,
) -> SolverTrace:
    """Gradient descent using ``schedule`` steps, repeated every period when ``cyclic``."""
    if isinstance(schedule, StepSchedule):
        steps = schedule.steps
        label = algorithm or _ORIGIN_LABEL[schedule.origin]
    else:
        steps = np.asarray(schedule, dtype=float).ravel()
        label = algorithm or Algorithm.GD_CONSTANT
    if steps.size == 0:
        raise ScheduleEmpty("schedule has no steps")
    if total_iters < 0:
        raise InvalidParams("total_iters must be nonnegative")
    if not cyclic and total_iters > steps.size:
        raise InvalidParams("non-cyclic runs cannot exceed the schedule length")
    a, b = problem.matrix_a, problem.rhs
    x = _start(problem, x0)
    rec = _Recorder(problem.dim, reference, stride, keep_iterates)
    rec(0, x)
    period = steps.size
    for t in range(total_iters):
        x = x - steps[t % period] * _residual(a, b, x)
        rec(t + 1, x)
    return rec.trace(label, period)


def run_momentum(
    problem: QuadraticProblem,
    params: BaselineParams,
    x0,
    total_iters: int,
    *,
    stride: int = 1,
    reference=None,
    keep_iterates: bool = False,
) -> SolverTrace:
    """Heavy-ball iteration started from ``x^(-1) = 0``."""
    a, b = problem.matrix_a, problem.rhs
    x = _start(problem, x0)
    x_prev = np.zeros_like(x)
    rec = _Recorder(problem.dim, reference, stride, keep_iterates)
    rec(0, x)
    for t in range(total_iters):
        x_next = x - params.gamma_prime * _residual(a, b, x) + params.beta * (x - x_prev)
        x_prev, x = x, x_next
        rec(t + 1, x)
    return rec.trace(Algorithm.MOMENTUM)


def run_cheb_semi(
    problem: QuadraticProblem,
    params: BaselineParams,
    x0,
    total_iters: int,
    *,
    stride: int = 1,
    reference=None,
    keep_iterates: bool = False,
) -> SolverTrace:
    """Chebyshev semi-iterative method; the update into ``x^(t+1)`` uses ``gamma'_(t+1)``."""
    if params.xi == 0.0:
        warnings.warn(
            "xi = 0 (kappa = 1): semi-iteration reduces to plain gradient descent",
            DegenerateSpectrumWarning,
            stacklevel=2,
        )
    a, b = problem.matrix_a, problem.rhs
    x = _start(problem, x0)
    x_prev = np.zeros_like(x)
    omegas = cheb_semi_coefficients(params.xi, total_iters)
    rec = _Recorder(problem.dim, reference, stride, keep_iterates)
    rec(0, x)
    for t in range(total_iters):
        w = omegas[t]
        x_next = x - w * params.semi_scale * _residual(a, b, x) + (w - 1.0) * (x - x_prev)
        x_prev, x = x, x_next
        rec(t + 1, x)
    return rec.trace(Algorithm.CHEB_SEMI)


def mse_against(trace: SolverTrace, reference) -> SolverTrace:
    """Recompute a trace's MSE against ``reference`` using its stored iterates."""
    if trace.iterates is None:
        if len(trace) == 0:
            return SolverTrace(trace.algorithm, trace.t.copy(), trace.mse.copy(), trace.schedule_period)
        raise InvalidParams("trace was recorded without iterates")
    ref = np.asarray(reference, dtype=float)
    if ref.shape != (trace.iterates.shape[-1],):
        raise DimensionMismatch(f"reference must have shape ({trace.iterates.shape[-1]},)")
    mse = np.array([_mse(x, ref) for x in trace.iterates])
    return SolverTrace(trace.algorithm, trace.t.copy(), mse, trace.schedule_period, trace.iterates)


def log_slope(trace: SolverTrace, t_lo: int, t_hi: int, every: int = 1) -> float:
    """Least-squares slope of ``log(mse)`` against ``t`` over recorded t in [t_lo, t_hi]."""
    sel = (trace.t >= t_lo) & (trace.t <= t_hi) & (trace.t % every == 0) & (trace.mse > 0)
    if np.count_nonzero(sel) < 2:
        raise InvalidParams("need at least two positive records to fit a slope")
    return float(np.polyfit(trace.t[sel].astype(float), np.log(trace.mse[sel]), 1)[0])


def write_traces_csv(stream: TextIO, traces: Iterable[SolverTrace], comment: Optional[str] = None):
    """CSV with header ``algorithm,t,mse``; values at full double precision."""
    if comment is not None:
        stream.write(f"# {comment}\n")
    stream.write("algorithm,t,mse\n")
    for tr in traces:
        name = tr.algorithm.value
        for t, v in zip(tr.t, tr.mse):
            stream.write(f"{name},{int(t)},{v:.17g}\n")


def read_traces_csv(stream: TextIO) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    out: dict[str, tuple[list, list]] = {}
    rows = (ln for ln in stream if ln.strip() and not ln.startswith("#"))
    header = next(rows, None)
    if header is None or header.strip() != "algorithm,t,mse":
        raise InvalidParams("not a trace CSV")
    for ln in rows:
        name, t, v = ln.strip().split(",")
        ts, vs = out.setdefault(name, ([], []))
        ts.append(int(t))
        vs.append(float(v))
    return {k: (np.array(ts), np.array(vs)) for k, (ts, vs) in out.items()}
