"""Compiled inner loops. Imported lazily; callers fall back to numpy when numba is missing."""

import math

from numba import njit


@njit(cache=True)
def cyclic_jacobi(a, v, want_vectors, tol_abs, max_sweeps):
    """Row-cyclic Jacobi sweeps in place; returns the sweep count or -1 on failure."""
    n = a.shape[0]
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j] * a[i, j]
        if math.sqrt(off) <= tol_abs:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                d = a[q, q] - a[p, p]
                sgn = 2.0 if d >= 0.0 else -2.0
                t = sgn * apq / (abs(d) + math.sqrt(d * d + 4.0 * apq * apq))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                if want_vectors:
                    for k in range(n):
                        vkp = v[k, p]
                        vkq = v[k, q]
                        v[k, p] = c * vkp - s * vkq
                        v[k, q] = s * vkp + c * vkq
    return -1
