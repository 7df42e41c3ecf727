"""Brute-force reference implementations used only by the tests."""

import math

import numpy as np


def all_pairings(points):
    points = tuple(points)
    if not points:
        yield ()
        return
    a = points[0]
    for j in range(1, len(points)):
        rest = points[1:j] + points[j + 1:]
        for p in all_pairings(rest):
            yield ((a, points[j]),) + p


def blocks_cross(b1, b2):
    for a in b1:
        for c in b1:
            for b in b2:
                for d in b2:
                    if a < b < c < d:
                        return True
    return False


def is_noncrossing(blocks):
    blocks = [tuple(b) for b in blocks]
    return not any(blocks_cross(x, y) or blocks_cross(y, x)
                   for i, x in enumerate(blocks) for y in blocks[i + 1:])


def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def kreweras_by_maximality(pairs, m):
    """Coarsest partition of the barred points whose union with the pairing is non-crossing.

    Point ``i`` sits at position ``2i - 1`` and its barred copy at ``2i``.
    """
    sigma = [(2 * u - 1, 2 * v - 1) for u, v in pairs]
    good = []
    for part in set_partitions(range(1, 2 * m + 1)):
        bar = [tuple(2 * i for i in b) for b in part]
        if is_noncrossing(sigma + bar):
            good.append(part)
    best = min(good, key=len)
    return sorted(tuple(sorted(b)) for b in best), good


def inertia_eigenvalues(a, tol=1e-13):
    """Eigenvalues of a small symmetric matrix by bisection on the negative-pivot count of A - xI."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]

    def count_below(x):
        # Sylvester inertia via LDL^T without pivoting; zero pivots nudged
        m = a - x * np.eye(n)
        neg = 0
        m = m.copy()
        for k in range(n):
            piv = m[k, k]
            if piv == 0.0:
                piv = 1e-300
            if piv < 0:
                neg += 1
            if k + 1 < n:
                m[k + 1:, k + 1:] -= np.outer(m[k + 1:, k], m[k, k + 1:]) / piv
        return neg

    r = float(np.max(np.sum(np.abs(a), axis=1))) + 1.0
    out = []
    for j in range(n):
        lo, hi = -r, r
        while hi - lo > tol * max(1.0, r):
            mid = 0.5 * (lo + hi)
            if count_below(mid) > j:
                hi = mid
            else:
                lo = mid
        out.append(0.5 * (lo + hi))
    return np.array(out)


def cesaro_partial(kind_a, w_a, kind_b, w_b, N=10 ** 6):
    k = np.arange(1, N + 1, dtype=float)
    fa = np.cos if kind_a == "cos" else np.sin
    fb = np.cos if kind_b == "cos" else np.sin
    return float(np.mean(fa(k * w_a) * fb(k * w_b)))


def catalan_recurrence(m):
    c = [1]
    for i in range(m):
        c.append(sum(c[j] * c[i - j] for j in range(i + 1)))
    return c[m]


def direct_ma_field(c, u, N):
    """``Y[i, j] = sum_{k,l} c[k, l] U[i - k, j - l]`` by explicit loops (U offset by n)."""
    n = (c.shape[0] - 1) // 2
    y = np.zeros((N, N))
    for i in range(N):
        for j in range(N):
            s = 0.0
            for k in range(-n, n + 1):
                for l in range(-n, n + 1):
                    s += c[k + n, l + n] * u[i - k + n, j - l + n]
            y[i, j] = s
    return y


def l_sigma_by_loops(f, pairs, tmap, grid):
    """Plain tensor-product midpoint sum of L for m <= 2 (used on tiny grids)."""
    m = len(pairs)
    h = 2 * math.pi / grid
    g = -math.pi + (np.arange(grid) + 0.5) * h
    total = 0.0
    for idx in np.ndindex(*([grid] * (m + 1))):
        x = [g[i] for i in idx]
        val = 1.0
        for u, v in pairs:
            a, b = x[tmap[u - 1] - 1], x[tmap[v - 1] - 1]
            val *= f(a, -b) + f(-b, a)
        total += val
    return float(total) * h ** (m + 1)
