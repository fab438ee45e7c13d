"""Orderings of Chebyshev steps.

Two procedures: an emulation of incremental training that picks, generation by
generation, the permutation of the new Chebyshev steps closest to the previous
generation's steps; and a search over affine index permutations
``pi(t+1) = a pi(t) + b (mod T)`` minimizing the worst transient amplification.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParams, SizeLimitExceeded
from .sched import (
    Origin,
    StepSchedule,
    chebyshev_steps,
    optimal_constant_step,
    prefix_interval_maxima,
)

EXHAUSTIVE_CAP = 12


def is_power_of_two(T: int) -> bool:
    return T >= 1 and (T & (T - 1)) == 0


@dataclass(frozen=True)
class AffinePermutation:
    a: int
    b: int
    c: int
    T: int
    sequence: tuple = ()

    def __post_init__(self):
        T = self.T
        if T < 2 or not is_power_of_two(T):
            raise InvalidParams(f"T must be a power of two >= 2, got {T}")
        if self.b % 2 != 1:
            raise InvalidParams(f"b must be odd, got {self.b}")
        if self.a % 4 != 1:
            raise InvalidParams(f"a must be 1 mod 4, got {self.a}")
        if not 0 <= self.c < T:
            raise InvalidParams(f"c must lie in [0, {T - 1}], got {self.c}")
        seq = [self.c]
        for _ in range(T - 1):
            seq.append((self.a * seq[-1] + self.b) % T)
        if sorted(seq) != list(range(T)):
            raise InvalidParams(f"({self.a}, {self.b}, {self.c}) does not permute 0..{T - 1}")
        object.__setattr__(self, "sequence", tuple(seq))

    def apply(self, values) -> np.ndarray:
        """Reorder so that position t holds ``values[pi(t)]``."""
        values = np.asarray(values)
        if values.shape[0] != self.T:
            raise InvalidParams(f"expected {self.T} values, got {values.shape[0]}")
        return values[list(self.sequence)]


def affine_permutation(a: int, b: int, c: int, T: int) -> AffinePermutation:
    return AffinePermutation(a, b, c, T)


def admissible_triples(T: int, c_min: int = 0):
    """All (a, b, c) with a = 1 mod 4 and b odd in [1, T-1], c in [c_min, T-1], lexicographic."""
    if not is_power_of_two(T) or T < 2:
        raise InvalidParams(f"T must be a power of two >= 2, got {T}")
    for a in range(1, T, 4):
        for b in range(1, T, 2):
            for c in range(c_min, T):
                yield a, b, c


def temporal_spectral_radius(schedule, lambda_min: Optional[float] = None,
                             lambda_max: Optional[float] = None) -> float:
    """Worst interval bound over all prefixes of an ordered schedule."""
    if isinstance(schedule, StepSchedule):
        steps = schedule.steps
        lambda_min = schedule.lambda_min if lambda_min is None else lambda_min
        lambda_max = schedule.lambda_max if lambda_max is None else lambda_max
    else:
        steps = np.asarray(schedule, dtype=float).ravel()
        if lambda_min is None or lambda_max is None:
            raise InvalidParams("interval bounds are required for a bare step array")
    if steps.size == 0:
        raise InvalidParams("schedule is empty")
    return float(np.max(prefix_interval_maxima(steps, lambda_min, lambda_max)))


@dataclass(frozen=True)
class SearchResult:
    permutation: AffinePermutation
    schedule: StepSchedule
    objective: float


def permutation_search(lambda_min: float, lambda_max: float, T: int,
                       c_min: int = 0) -> SearchResult:
    """Exhaustive scan of admissible (a, b, c); ties go to the lexicographically smallest triple.

    ``c_min=1`` restricts the start index to 1..T-1 as in the original pseudocode.
    """
    if T < 2 or not is_power_of_two(T):
        raise InvalidParams(f"T must be a power of two >= 2, got {T}")
    base = chebyshev_steps(T, lambda_min, lambda_max)
    best = None
    for a, b, c in admissible_triples(T, c_min):
        perm = AffinePermutation(a, b, c, T)
        value = temporal_spectral_radius(perm.apply(base.steps), lambda_min, lambda_max)
        if best is None or value < best[1]:
            best = (perm, value)
    perm, value = best
    schedule = StepSchedule(perm.apply(base.steps), lambda_min, lambda_max, Origin.PERMUTED)
    return SearchResult(perm, schedule, value)


def _closest_permutation(d: np.ndarray, c: np.ndarray) -> np.ndarray:
    """First permutation (lexicographic over index tuples) minimizing ``||d - c[pi]||``.

    Depth-first in lexicographic order, pruned against the optimum, which the
    rearrangement inequality gives by matching sorted ranks. Equivalent to
    scanning all permutations and keeping the first strict improvement.
    """
    n = c.size
    order_d = np.argsort(d, kind="stable")
    matched = np.empty(n, dtype=int)
    matched[order_d] = np.argsort(c, kind="stable")
    optimum = float(np.sum((d - c[matched]) ** 2))
    limit = optimum * (1.0 + 1e-12) + 1e-300

    used = np.zeros(n, dtype=bool)
    chosen = []

    def lower_bound(pos):
        # optimal completion of the remaining positions, again by rank matching
        rest_d = np.sort(d[pos:])
        rest_c = np.sort(c[~used])
        return float(np.sum((rest_d - rest_c) ** 2))

    def dfs(pos, partial):
        if pos == n:
            return True
        for j in range(n):
            if used[j]:
                continue
            cost = partial + (d[pos] - c[j]) ** 2
            used[j] = True
            if cost + lower_bound(pos + 1) <= limit:
                chosen.append(j)
                if dfs(pos + 1, cost):
                    return True
                chosen.pop()
            used[j] = False
        return False

    dfs(0, 0.0)
    return np.array(chosen, dtype=int)


def emulate_incremental(lambda_min: float, lambda_max: float, T: int, init_value: float,
                        max_exhaustive: int = EXHAUSTIVE_CAP) -> StepSchedule:
    """Order Chebyshev steps the way incremental training would discover them.

    Starting from the single optimal constant step, each generation appends
    ``init_value`` to the current ordered steps and reorders the Chebyshev steps
    of the new length to be closest (Euclidean) to that point.
    """
    if T < 1:
        raise InvalidParams("T must be at least 1")
    if T > max_exhaustive:
        raise SizeLimitExceeded(f"exhaustive permutation search is capped at T = {max_exhaustive}")
    c = np.array([optimal_constant_step(lambda_min, lambda_max)])
    for t in range(2, T + 1):
        d = np.append(c, init_value)
        cheb = chebyshev_steps(t, lambda_min, lambda_max).steps
        c = cheb[_closest_permutation(d, cheb)]
    origin = Origin.CHEBYSHEV if T == 1 else Origin.PERMUTED
    return StepSchedule(c, lambda_min, lambda_max, origin)
