"""Dense symmetric eigenvalues: Householder tridiagonalization + implicit-shift QL.

Only eigenvalues are computed.  Both kernels are compiled with numba; the
tridiagonal QL step follows the classic ``tqli`` recurrence with Wilkinson
shifts.  An off-diagonal entry is dropped when ``|e_i| <= eps (|d_i| + |d_{i+1}|)``
or ``|e_i| <= eps ||T||``; the second test matters for low-rank inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import EigenConvergenceError

EPS = np.finfo(float).eps
MAX_SWEEPS = 60


@dataclass(frozen=True)
class EigenSpectrum:
    """Ascending eigenvalues of an N x N symmetric matrix.

    ``norm_max`` is ``max |A_ij|`` of the input, used for relative zero
    thresholds downstream.
    """

    values: np.ndarray
    dim: int
    norm_max: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@numba.njit(cache=True, nogil=True)
def _tridiagonalize(a):
    # in place on a full symmetric copy; returns diagonal d and sub-diagonal e
    n = a.shape[0]
    d = np.empty(n)
    e = np.zeros(n)
    v = np.empty(n)
    p = np.empty(n)
    for k in range(n - 2):
        s = 0.0
        for i in range(k + 1, n):
            s += a[i, k] * a[i, k]
        d[k] = a[k, k]
        if s == 0.0:
            e[k] = 0.0
            continue
        norm = math.sqrt(s)
        x0 = a[k + 1, k]
        alpha = -norm if x0 >= 0.0 else norm
        for i in range(k + 1, n):
            v[i] = a[i, k]
        v[k + 1] -= alpha
        vv = s - x0 * x0 + v[k + 1] * v[k + 1]
        beta = 2.0 / vv
        for i in range(k + 1, n):
            acc = 0.0
            for j in range(k + 1, n):
                acc += a[i, j] * v[j]
            p[i] = beta * acc
        kk = 0.0
        for i in range(k + 1, n):
            kk += v[i] * p[i]
        kk *= 0.5 * beta
        for i in range(k + 1, n):
            p[i] -= kk * v[i]
        for i in range(k + 1, n):
            vi = v[i]
            pi = p[i]
            for j in range(k + 1, n):
                a[i, j] -= vi * p[j] + pi * v[j]
        e[k] = alpha
    if n >= 2:
        d[n - 2] = a[n - 2, n - 2]
        e[n - 2] = a[n - 1, n - 2]
    d[n - 1] = a[n - 1, n - 1]
    return d, e


@numba.njit(cache=True, nogil=True)
def _tql(d, e, eps, floor, max_iter):
    # implicit QL on (d, e); e[i] couples d[i] and d[i+1].  Returns status, residual.
    n = d.shape[0]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd or abs(e[m]) <= floor:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                return 1, abs(e[l])
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            early = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    early = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if early:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0, 0.0


def tridiagonalize(a) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction; returns ``(diag, offdiag)`` with ``len(offdiag) == N - 1``."""
    a = np.array(a, dtype=float, order="C")
    if a.shape[0] == 0:
        return np.empty(0), np.empty(0)
    d, e = _tridiagonalize(a)
    return d, e[:-1].copy()


def tridiagonal_eigenvalues(d, e) -> np.ndarray:
    d = np.array(d, dtype=float)
    n = d.size
    work = np.zeros(n)
    work[: n - 1] = e
    # the norm-scaled floor lets clusters of near-zero eigenvalues deflate
    floor = EPS * (float(np.max(np.abs(d))) + float(np.max(np.abs(work)))) if n else 0.0
    status, residual = _tql(d, work, EPS, floor, MAX_SWEEPS)
    if status:
        raise EigenConvergenceError(n, residual)
    return np.sort(d)


def _as_array(a):
    return np.asarray(getattr(a, "entries", a), dtype=float)


def eigenvalues(a) -> EigenSpectrum:
    """All eigenvalues of a symmetric matrix (``SymmetricMatrix`` or array), ascending."""
    arr = _as_array(a)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("eigenvalues needs a square matrix")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    n = arr.shape[0]
    norm_max = float(np.max(np.abs(arr))) if n else 0.0
    if n == 0:
        return EigenSpectrum(np.empty(0), 0, 0.0)
    d, e = tridiagonalize(arr)
    return EigenSpectrum(tridiagonal_eigenvalues(d, e), n, norm_max)


def trace_power(a, p: int) -> float:
    """``Tr(A^p)`` by repeated multiplication."""
    if p < 1:
        raise ValueError("p must be >= 1")
    arr = _as_array(a)
    if p == 1:
        return float(np.trace(arr))
    half = p // 2
    acc = arr
    for _ in range(half - 1):
        acc = acc @ arr
    # Tr(A^p) = <A^h, A^(p-h)> using symmetry of powers
    if p % 2 == 0:
        return float(np.sum(acc * acc))
    return float(np.sum(acc * (acc @ arr)))
