"""Chebyshev step schedules and spectral-radius / convergence-rate analysis.

Everything here works on the scalar polynomial ``p(lam) = prod_t (1 - gamma_t lam)``:
the T-step iteration matrix of gradient descent has eigenvalues ``p(lambda_i)``,
so the matrices themselves are never formed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO, Union

import numpy as np

from .errors import DegenerateSpectrum, InvalidParams, ParseError, ScheduleEmpty
from .linalg import Spectrum

GRID_POINTS = 4096
REFINE_TOL = 1e-10
MINIMAX_GRID_TOL = 1e-6

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_GOLDEN_MAX_ITER = 200


class Origin(str, enum.Enum):
    CHEBYSHEV = "Chebyshev"
    CONSTANT_OPTIMAL = "ConstantOptimal"
    LEARNED = "Learned"
    PERMUTED = "Permuted"
    CUSTOM = "Custom"


@dataclass(frozen=True, eq=False)
class StepSchedule:
    steps: np.ndarray
    lambda_min: float
    lambda_max: float
    origin: Origin = Origin.CUSTOM

    def __post_init__(self):
        steps = np.array(self.steps, dtype=float, copy=True).ravel()
        if steps.size == 0:
            raise ScheduleEmpty("a schedule needs at least one step")
        if not np.all(np.isfinite(steps)) or np.any(steps <= 0):
            raise InvalidParams("steps must be positive and finite")
        steps.setflags(write=False)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "origin", Origin(self.origin))
        object.__setattr__(self, "lambda_min", float(self.lambda_min))
        object.__setattr__(self, "lambda_max", float(self.lambda_max))

    @property
    def period(self) -> int:
        return self.steps.size

    def __len__(self):
        return self.steps.size

    def reordered(self, order, origin: Origin = Origin.PERMUTED) -> "StepSchedule":
        return StepSchedule(self.steps[np.asarray(order)], self.lambda_min, self.lambda_max, origin)


@dataclass(frozen=True)
class SpectralSummary:
    rho: float
    rho_upper_interval: float
    rho_upper_closed: Optional[float]
    rate_per_iteration: float


def _check_interval(lambda_min, lambda_max):
    if not (0 < lambda_min < lambda_max):
        raise DegenerateSpectrum(
            f"need 0 < lambda_min < lambda_max, got [{lambda_min}, {lambda_max}]"
        )


def _steps_of(schedule) -> np.ndarray:
    if isinstance(schedule, StepSchedule):
        return schedule.steps
    steps = np.asarray(schedule, dtype=float).ravel()
    if steps.size == 0:
        raise ScheduleEmpty("a schedule needs at least one step")
    return steps


def step_polynomial(steps, lam) -> np.ndarray:
    """Evaluate ``prod_t (1 - gamma_t lam)`` at each point of ``lam``."""
    steps = _steps_of(steps)
    lam = np.asarray(lam, dtype=float)
    return np.prod(1.0 - np.multiply.outer(steps, lam), axis=0)


def chebyshev_points(T: int, lambda_min: float, lambda_max: float) -> np.ndarray:
    """Zeros of the degree-T Chebyshev polynomial shifted to [lambda_min, lambda_max], t = 0..T-1."""
    theta = (2.0 * np.arange(T) + 1.0) * math.pi / (2.0 * T)
    return 0.5 * (lambda_max + lambda_min) + 0.5 * (lambda_max - lambda_min) * np.cos(theta)


def chebyshev_steps(T: int, lambda_min: float, lambda_max: float) -> StepSchedule:
    """Reciprocals of the shifted Chebyshev points, in index order (ascending steps)."""
    if T < 1:
        raise InvalidParams("T must be at least 1")
    _check_interval(lambda_min, lambda_max)
    steps = 1.0 / chebyshev_points(T, lambda_min, lambda_max)
    return StepSchedule(steps, lambda_min, lambda_max, Origin.CHEBYSHEV)


def optimal_constant_step(lambda_min: float, lambda_max: float) -> float:
    return 2.0 / (lambda_min + lambda_max)


def constant_schedule(T: int, lambda_min: float, lambda_max: float) -> StepSchedule:
    gamma = optimal_constant_step(lambda_min, lambda_max)
    return StepSchedule(np.full(T, gamma), lambda_min, lambda_max, Origin.CONSTANT_OPTIMAL)


def spectral_radius(schedule, spectrum: Union[Spectrum, Iterable[float]]) -> float:
    """Largest ``|p(lambda_i)|`` over the given eigenvalues."""
    lam = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else np.asarray(spectrum, float)
    if lam.size == 0:
        raise InvalidParams("spectrum is empty")
    return float(np.max(np.abs(step_polynomial(schedule, lam))))


def _golden_max(f, lo, hi, tol):
    """Maximize a unimodal ``f`` on [lo, hi] by golden-section search."""
    # the bracket cannot shrink below a few ulps of its endpoints
    tol = max(tol, 8.0 * np.finfo(float).eps * max(abs(lo), abs(hi)))
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(_GOLDEN_MAX_ITER):
        if hi - lo <= tol:
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
    return max(f1, f2)


def _refine(steps, grid, idx, best, tol):
    lo = grid[max(idx - 1, 0)]
    hi = grid[min(idx + 1, grid.size - 1)]

    def f(x):
        return abs(float(np.prod(1.0 - steps * x)))

    return max(best, _golden_max(f, lo, hi, tol))


def rho_upper_interval(
    schedule,
    lambda_min: Optional[float] = None,
    lambda_max: Optional[float] = None,
    grid_points: int = GRID_POINTS,
) -> float:
    """Maximum of ``|p(lam)|`` over the whole interval [lambda_min, lambda_max].

    A uniform grid (endpoints included) locates the best bracket, then
    golden-section search refines inside it.
    """
    if lambda_min is None or lambda_max is None:
        if not isinstance(schedule, StepSchedule):
            raise InvalidParams("interval bounds are required for a bare step array")
        lambda_min = schedule.lambda_min if lambda_min is None else lambda_min
        lambda_max = schedule.lambda_max if lambda_max is None else lambda_max
    _check_interval(lambda_min, lambda_max)
    steps = _steps_of(schedule)
    grid = np.linspace(lambda_min, lambda_max, grid_points)
    values = np.abs(step_polynomial(steps, grid))
    idx = int(np.argmax(values))
    return _refine(steps, grid, idx, float(values[idx]), REFINE_TOL * (lambda_max - lambda_min))


def prefix_interval_maxima(
    steps, lambda_min: float, lambda_max: float, grid_points: int = GRID_POINTS
) -> np.ndarray:
    """``max_lam |prod_{t' <= t} (1 - gamma_t' lam)|`` for every prefix length t + 1.

    Grid values are computed for all prefixes at once; golden-section refinement
    is applied to the prefix maxima that could decide the overall maximum.
    """
    _check_interval(lambda_min, lambda_max)
    steps = _steps_of(steps)
    grid = np.linspace(lambda_min, lambda_max, grid_points)
    partial = np.abs(np.cumprod(1.0 - np.multiply.outer(steps, grid), axis=0))
    idx = np.argmax(partial, axis=1)
    values = partial[np.arange(steps.size), idx]
    top = values.max()
    tol = REFINE_TOL * (lambda_max - lambda_min)
    out = values.astype(float)
    for t in np.nonzero(values >= 0.999 * top)[0]:
        out[t] = _refine(steps[: t + 1], grid, int(idx[t]), float(values[t]), tol)
    return out


def cheb_upper_closed_form(T: int, kappa: float) -> float:
    """``1 / cosh(T * arccosh((kappa + 1) / (kappa - 1)))`` written with ``r = (sqrt(k)-1)/(sqrt(k)+1)``.

    Evaluated as ``2 r^T / (1 + r^(2T))`` in the log domain so that large
    ``T`` or ``kappa`` underflow gracefully instead of overflowing.
    """
    if T < 1:
        raise InvalidParams("T must be at least 1")
    if not kappa > 1:
        raise DegenerateSpectrum("kappa must exceed 1")
    log_r = math.log(rate_lower_bound(kappa))
    return math.exp(math.log(2.0) + T * log_r - math.log1p(math.exp(2.0 * T * log_r)))


def rate_constant(kappa: float) -> float:
    return (kappa - 1.0) / (kappa + 1.0)


def rate_lower_bound(kappa: float) -> float:
    sk = math.sqrt(kappa)
    return (sk - 1.0) / (sk + 1.0)


def rate_chgd_upper(T: int, kappa: float) -> float:
    if not kappa > 1:
        raise DegenerateSpectrum("kappa must exceed 1")
    log_r = math.log(rate_lower_bound(kappa))
    log_bound = math.log(2.0) + T * log_r - math.log1p(math.exp(2.0 * T * log_r))
    return math.exp(log_bound / T)


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool


GAUSSIAN_UNIT_MEAN_C = 1.0 / math.sqrt(2.0)


def mse_bound_check(
    schedule, spectrum, empirical_mse: float, C: float = GAUSSIAN_UNIT_MEAN_C
) -> BoundCheck:
    """Compare the spectral radius with ``C * sqrt(n * mse)``."""
    if empirical_mse < 0 or C <= 0:
        raise InvalidParams("empirical_mse must be >= 0 and C > 0")
    n = len(spectrum.eigenvalues) if isinstance(spectrum, Spectrum) else len(spectrum)
    lhs = spectral_radius(schedule, spectrum)
    rhs = C * math.sqrt(n * empirical_mse)
    return BoundCheck(lhs, rhs, lhs <= rhs)


def minimax_competitor_test(
    T: int, lambda_min: float, lambda_max: float, trials: int, seed: int = 0
) -> bool:
    """True when no random step vector in (0, 2/lambda_min)^T beats the Chebyshev bound."""
    if trials < 1:
        raise InvalidParams("trials must be positive")
    _check_interval(lambda_min, lambda_max)
    bound = cheb_upper_closed_form(T, lambda_max / lambda_min)
    rng = np.random.default_rng(seed)
    high = 2.0 / lambda_min
    for _ in range(trials):
        alpha = rng.uniform(0.0, high, size=T)
        alpha[alpha == 0.0] = high / 2
        if rho_upper_interval(alpha, lambda_min, lambda_max) < bound - MINIMAX_GRID_TOL:
            return False
    return True


def summarize(schedule: StepSchedule, spectrum: Spectrum) -> SpectralSummary:
    rho = spectral_radius(schedule, spectrum)
    upper = rho_upper_interval(schedule, schedule.lambda_min, schedule.lambda_max)
    closed = None
    if schedule.origin is Origin.CHEBYSHEV:
        closed = cheb_upper_closed_form(schedule.period, schedule.lambda_max / schedule.lambda_min)
    return SpectralSummary(rho, upper, closed, rho ** (1.0 / schedule.period))


# -- schedule file format ----------------------------------------------------


def write_schedule(stream: TextIO, schedule: StepSchedule, trailer: Iterable[str] = ()) -> None:
    """``T lambda_min lambda_max origin`` then one step per line, 17 significant digits."""
    stream.write(
        f"{schedule.period} {schedule.lambda_min:.17g} {schedule.lambda_max:.17g} "
        f"{schedule.origin.value}\n"
    )
    for g in schedule.steps:
        stream.write(f"{g:.17g}\n")
    for line in trailer:
        stream.write(f"# {line}\n")


def read_schedule(source: Union[str, TextIO]) -> StepSchedule:
    if isinstance(source, str):
        with open(source) as fh:
            return read_schedule(fh)
    lines = [ln.strip() for ln in source if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("empty schedule file", row=1)
    head = lines[0].split()
    if len(head) != 4:
        raise ParseError("header must be 'T lambda_min lambda_max origin'", row=1)
    try:
        T = int(head[0])
        lmin, lmax = float(head[1]), float(head[2])
        origin = Origin(head[3])
    except ValueError as exc:
        raise ParseError(str(exc), row=1) from None
    if len(lines) - 1 != T:
        raise ParseError(f"header announces {T} steps, found {len(lines) - 1}")
    try:
        steps = [float(x) for x in lines[1:]]
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return StepSchedule(np.array(steps), lmin, lmax, origin)
