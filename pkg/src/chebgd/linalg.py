"""Dense symmetric linear algebra, random problem generation and eigenvalue estimation.

Random numbers come from numpy's ``PCG64`` bit generator (``np.random.default_rng``).
Its stream and the ziggurat Gaussian sampler are specified by numpy and identical
across platforms, so a seed pins every generated problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, TextIO, Union

import numpy as np

from .errors import (
    DegenerateShift,
    DegenerateSpectrum,
    DimensionMismatch,
    InvalidParams,
    NonConvergence,
    ParseError,
)

SYMMETRY_RTOL = 1e-12
FACTOR_RTOL = 1e-10
JACOBI_TOL = 1e-12
SHIFT_SAFEGUARD = 1e-6


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class QuadraticProblem:
    """Minimize ``x^T A x / 2 - b^T x`` with symmetric positive-definite ``A``.

    ``factor_h`` keeps the Gram factor when ``A = H^T H + ridge_eta * I``.
    ``target`` is ``b`` (``H^T y`` for least squares); ``None`` means the
    canonical problem whose minimizer is the zero vector.
    """

    matrix_a: np.ndarray
    factor_h: Optional[np.ndarray] = None
    ridge_eta: float = 0.0
    target: Optional[np.ndarray] = None

    def __post_init__(self):
        a = _frozen(self.matrix_a)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DimensionMismatch(f"matrix_a must be square and non-empty, got {a.shape}")
        scale = max(np.max(np.abs(a)), np.finfo(float).tiny)
        if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
            raise InvalidParams("matrix_a is not symmetric")
        if self.ridge_eta < 0:
            raise InvalidParams("ridge_eta must be nonnegative")
        object.__setattr__(self, "matrix_a", a)
        n = a.shape[0]
        if self.factor_h is not None:
            h = _frozen(self.factor_h)
            if h.ndim != 2 or h.shape[1] != n:
                raise DimensionMismatch(f"factor_h must be m x {n}, got {h.shape}")
            gram = h.T @ h + self.ridge_eta * np.eye(n)
            if np.max(np.abs(gram - a)) >= FACTOR_RTOL * scale:
                raise InvalidParams("factor_h is inconsistent with matrix_a")
            object.__setattr__(self, "factor_h", h)
        if self.target is not None:
            b = _frozen(self.target)
            if b.shape != (n,):
                raise DimensionMismatch(f"target must have shape ({n},), got {b.shape}")
            object.__setattr__(self, "target", b)

    @property
    def dim(self) -> int:
        return self.matrix_a.shape[0]

    @property
    def rhs(self) -> np.ndarray:
        """The target vector, zeros when absent."""
        if self.target is None:
            return np.zeros(self.dim)
        return self.target

    @classmethod
    def from_gram(cls, h, eta: float = 0.0, y=None) -> "QuadraticProblem":
        h = np.asarray(h, dtype=float)
        a = h.T @ h
        a = 0.5 * (a + a.T)
        if eta:
            a = a + eta * np.eye(h.shape[1])
        target = None if y is None else h.T @ np.asarray(y, dtype=float)
        return cls(a, factor_h=h, ridge_eta=float(eta), target=target)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending positive eigenvalues of a problem matrix."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        w = _frozen(np.ravel(self.eigenvalues))
        if w.size == 0:
            raise InvalidParams("spectrum is empty")
        if np.any(w <= 0):
            raise InvalidParams("eigenvalues must be strictly positive")
        if np.any(np.diff(w) < 0):
            raise InvalidParams("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", w)

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def kappa(self) -> float:
        return self.lambda_max / self.lambda_min

    @classmethod
    def from_bounds(cls, lambda_min: float, lambda_max: float) -> "Spectrum":
        return cls(np.array([lambda_min, lambda_max], dtype=float))

    def __len__(self):
        return self.eigenvalues.size


def marchenko_pastur_edges(n: int, m: int) -> tuple[float, float]:
    """Asymptotic (lambda_min, lambda_max) of ``H^T H`` for ``H`` m x n with N(0, 1/n) entries."""
    r = math.sqrt(m / n)
    return (1.0 - r) ** 2, (1.0 + r) ** 2


def generate_gaussian_problem(n: int, m: int, seed: int) -> QuadraticProblem:
    """Random Gram problem ``A = H^T H`` with i.i.d. N(0, 1/n) entries in ``H`` (m x n)."""
    if n < 1 or m < 1:
        raise InvalidParams("n and m must be positive")
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((m, n)) / math.sqrt(n)
    return QuadraticProblem.from_gram(h)


def as_matrix(problem_or_matrix) -> np.ndarray:
    if isinstance(problem_or_matrix, QuadraticProblem):
        return problem_or_matrix.matrix_a
    a = np.asarray(problem_or_matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


# -- dense kernels -----------------------------------------------------------


def matvec(a, x) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if a.ndim != 2 or x.ndim != 1 or a.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {x.shape}")
    return a @ x


def dot(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionMismatch(f"dot of {x.shape} and {y.shape}")
    return float(x @ y)


def norm2(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch(f"norm2 expects a vector, got shape {x.shape}")
    return float(np.linalg.norm(x))


# -- Jacobi eigensolver ------------------------------------------------------


@lru_cache(maxsize=16)
def _tournament_layout(size: int) -> tuple[np.ndarray, np.ndarray]:
    """Initial layout and per-round position permutation for the circle schedule.

    In a layout, positions (2k, 2k + 1) hold the k-th pair of the round. Player 0
    stays put while the others rotate, so consecutive layouts differ by a fixed
    permutation and ``size - 1`` rounds pair every index with every other once.
    """
    players = list(range(size))

    def layout(pl):
        out = []
        for i in range(size // 2):
            out += [pl[i], pl[size - 1 - i]]
        return np.array(out, dtype=np.intp)

    first = layout(players)
    rotated = [players[0]] + [players[-1]] + players[1:-1]
    second = layout(rotated)
    where = np.empty(size, dtype=np.intp)
    where[first] = np.arange(size)
    return first, where[second]


def jacobi_eigh(matrix, tol: float = JACOBI_TOL, max_sweeps: int = 100, vectors: bool = False):
    """Cyclic Jacobi eigendecomposition of a real symmetric matrix.

    Sweeps rotate every off-diagonal pair once and stop when the off-diagonal
    Frobenius norm falls below ``tol * ||A||_F``. A compiled row-cyclic kernel is
    used when numba is importable; otherwise a numpy version applies each
    round of a tournament ordering (disjoint pairs) at once.

    Returns ascending eigenvalues, and the eigenvector matrix (columns) when
    ``vectors`` is true.
    """
    a0 = as_matrix(matrix)
    n = a0.shape[0]
    total = float(np.linalg.norm(a0))
    if np.max(np.abs(a0 - a0.T), initial=0.0) > SYMMETRY_RTOL * max(total, 1.0):
        raise InvalidParams("matrix is not symmetric")
    if n == 1 or total == 0.0:
        return _sorted_result(np.diag(a0).astype(float), np.eye(n), vectors)
    kernel = _compiled_kernel()
    if kernel is None:
        return _jacobi_tournament(a0, total, tol, max_sweeps, vectors)
    a = np.array(a0, dtype=float, order="C", copy=True)
    v = np.eye(n) if vectors else np.zeros((1, 1))
    if kernel(a, v, vectors, tol * total, max_sweeps) < 0:
        raise NonConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    return _sorted_result(np.diagonal(a).copy(), v, vectors)


_KERNEL = False


def _compiled_kernel():
    global _KERNEL
    if _KERNEL is False:
        try:
            from ._kernels import cyclic_jacobi
        except ImportError:
            cyclic_jacobi = None
        _KERNEL = cyclic_jacobi
    return _KERNEL


def _jacobi_tournament(a0, total, tol, max_sweeps, vectors):
    n = a0.shape[0]
    size = n + (n % 2)
    first, perm = _tournament_layout(size)
    a = np.zeros((size, size))
    a[:n, :n] = a0
    a = a[np.ix_(first, first)]
    order = first.copy()
    v = np.eye(size)[:, first] if vectors else None

    for _ in range(max_sweeps):
        off = a.copy()
        np.fill_diagonal(off, 0.0)
        if np.linalg.norm(off) <= tol * total:
            keep = order < n
            w = np.diagonal(a)[keep].copy()
            return _sorted_result(w, v[:n][:, keep] if vectors else None, vectors)
        for _ in range(size - 1):
            diag = np.diagonal(a)
            app = diag[0::2]
            aqq = diag[1::2]
            apq = np.diagonal(a, 1)[0::2]
            d = aqq - app
            num = np.where(d >= 0, 2.0, -2.0) * apq
            den = np.abs(d) + np.sqrt(d * d + 4.0 * apq * apq)
            t = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            top = a[:, 0::2].copy()
            bot = a[:, 1::2]
            a[:, 0::2] = c * top - s * bot
            a[:, 1::2] = s * top + c * bot
            top = a[0::2, :].copy()
            bot = a[1::2, :]
            a[0::2, :] = c[:, None] * top - s[:, None] * bot
            a[1::2, :] = s[:, None] * top + c[:, None] * bot
            if v is not None:
                top = v[:, 0::2].copy()
                bot = v[:, 1::2]
                v[:, 0::2] = c * top - s * bot
                v[:, 1::2] = s * top + c * bot
                v = v[:, perm]
            a = a[np.ix_(perm, perm)]
            order = order[perm]
    raise NonConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")


def _sorted_result(w, v, vectors):
    order = np.argsort(w, kind="stable")
    if vectors:
        return w[order], v[:, order]
    return w[order]


def jacobi_eigenvalues(problem, tol: float = JACOBI_TOL, max_sweeps: int = 100) -> Spectrum:
    """Exact spectrum of ``problem.matrix_a`` via :func:`jacobi_eigh`."""
    w = jacobi_eigh(problem, tol=tol, max_sweeps=max_sweeps)
    if w[0] <= 0:
        raise DegenerateSpectrum(f"matrix is not positive definite (smallest eigenvalue {w[0]:.3g})")
    return Spectrum(w)


# -- power iteration ---------------------------------------------------------


def _power_iteration(apply, n, tol, max_iter, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    mu_prev = None
    for _ in range(int(max_iter)):
        w = apply(v)
        mu = float(v @ w)
        if mu_prev is not None and abs(mu - mu_prev) <= tol * abs(mu):
            return mu
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        mu_prev = mu
    raise NonConvergence(f"power iteration did not converge in {int(max_iter)} iterations")


def power_method_max(problem, tol: float = 1e-10, max_iter: int = 100_000, seed: int = 0) -> float:
    """Largest eigenvalue by power iteration with a Rayleigh-quotient stopping rule."""
    a = as_matrix(problem)
    return _power_iteration(lambda x: a @ x, a.shape[0], tol, max_iter, seed)


def power_method_min(
    problem,
    lambda_max_estimate: float,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    seed: int = 0,
) -> float:
    """Smallest eigenvalue from power iteration on ``s I - A``.

    The shift ``s`` is the supplied estimate of the largest eigenvalue inflated by
    a relative ``1e-6`` so the shifted spectrum stays nonnegative.
    """
    a = as_matrix(problem)
    n = a.shape[0]
    scale = np.max(np.abs(a))
    if np.max(np.abs(a - (np.trace(a) / n) * np.eye(n))) <= SYMMETRY_RTOL * scale:
        raise DegenerateShift("matrix is a multiple of the identity; shifted matrix vanishes")
    shift = lambda_max_estimate * (1.0 + SHIFT_SAFEGUARD)
    mu = _power_iteration(lambda x: shift * x - a @ x, n, tol, max_iter, seed)
    return shift - mu


# -- matrix file format ------------------------------------------------------


def write_matrix(stream: TextIO, problem_or_array, as_gram: bool = True) -> None:
    """Write ``n m`` then row-major entries (H when available, else A with m = 0)."""
    if isinstance(problem_or_array, QuadraticProblem):
        p = problem_or_array
        if as_gram and p.factor_h is not None and p.ridge_eta == 0.0:
            mat, n, m = p.factor_h, p.dim, p.factor_h.shape[0]
        else:
            mat, n, m = p.matrix_a, p.dim, 0
    else:
        mat = np.asarray(problem_or_array, dtype=float)
        n, m = mat.shape[1], 0
        if mat.shape[0] != mat.shape[1]:
            m = mat.shape[0]
    stream.write(f"{n} {m}\n")
    for row in mat:
        stream.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def read_matrix(source: Union[str, TextIO]) -> QuadraticProblem:
    if isinstance(source, str):
        with open(source) as fh:
            return read_matrix(fh)
    header = source.readline().split()
    if len(header) != 2:
        raise ParseError("header must be 'n m'", row=1)
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ParseError(f"bad header: {exc}", row=1) from None
    if n < 1 or m < 0:
        raise ParseError("n must be positive and m nonnegative", row=1)
    tokens = source.read().split()
    rows = m if m > 0 else n
    if len(tokens) != rows * n:
        raise ParseError(f"expected {rows * n} entries, found {len(tokens)}")
    try:
        values = np.array([float(t) for t in tokens]).reshape(rows, n)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if m > 0:
        return QuadraticProblem.from_gram(values)
    return QuadraticProblem(values)
