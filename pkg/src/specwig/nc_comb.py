"""Non-crossing pair partitions, Kreweras complements and the moment formulas built on them.

Two independent routes to the even moments of the limiting spectral law:

* :func:`beta_moment` -- a finite lattice sum over pairings and the
  block-sum-zero tuples ``S(sigma)``, fed by the truncated autocovariance;
* :func:`theorem_t2_moment` -- tensor-grid quadrature of ``L_{sigma,f}``
  over ``[-pi, pi]^{m+1}``.

For a trigonometric-polynomial-square density both give the same numbers.
"""

from __future__ import annotations

import itertools
import math
import string
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .spectral_measure import FourierTable, SpectralDensity, autocovariance_table, midpoints

MAX_ENUM_M = 6
MAX_BETA_M = 4
MAX_L_M = 3
L_GRID = {1: 64, 2: 64, 3: 32}


@dataclass(frozen=True)
class PairPartition:
    """Non-crossing pairing of ``{1, ..., 2m}`` given as sorted ``(u, v)`` pairs with ``u < v``."""

    m: int
    pairs: tuple

    def __post_init__(self):
        pairs = tuple(sorted((min(p), max(p)) for p in self.pairs))
        object.__setattr__(self, "pairs", pairs)
        if len(pairs) != self.m:
            raise ValueError(f"need {self.m} pairs, got {len(pairs)}")
        flat = sorted(x for p in pairs for x in p)
        if flat != list(range(1, 2 * self.m + 1)):
            raise ValueError("pairs must partition {1..2m}")
        if is_crossing(pairs):
            raise ValueError(f"pairing {pairs} is crossing")

    def partner(self) -> dict:
        out = {}
        for u, v in self.pairs:
            out[u] = v
            out[v] = u
        return out


def is_crossing(pairs) -> bool:
    """True if some ``a < b < c < d`` has ``(a, c)`` and ``(b, d)`` both pairs."""
    for (a, c), (b, d) in itertools.combinations(pairs, 2):
        if a > b:
            a, c, b, d = b, d, a, c
        if a < b < c < d:
            return True
    return False


def catalan(m: int) -> int:
    return math.comb(2 * m, m) // (m + 1)


def _nc2(points: tuple) -> list:
    if not points:
        return [()]
    first = points[0]
    out = []
    # partners at odd positions keep both sides of even size
    for j in range(1, len(points), 2):
        inner = _nc2(points[1:j])
        outer = _nc2(points[j + 1:])
        for a in inner:
            for b in outer:
                out.append(((first, points[j]),) + a + b)
    return out


@lru_cache(maxsize=None)
def enumerate_nc2(m: int) -> tuple:
    """All non-crossing pair partitions of ``{1..2m}``, ``1 <= m <= 6``, in canonical order."""
    if not 1 <= m <= MAX_ENUM_M:
        raise ValueError(f"m must be in 1..{MAX_ENUM_M}, got {m}")
    return tuple(PairPartition(m, p) for p in _nc2(tuple(range(1, 2 * m + 1))))


@dataclass(frozen=True)
class KrewerasBlocks:
    """Kreweras complement blocks ``V_1..V_{m+1}`` ordered by their maximal element.

    ``t_map[i-1]`` is the (1-based) index of the block holding ``i``.
    """

    blocks: tuple
    t_map: tuple

    @property
    def sizes(self) -> tuple:
        return tuple(len(b) for b in self.blocks)


@lru_cache(maxsize=None)
def kreweras(p: PairPartition) -> KrewerasBlocks:
    """Kreweras complement of a pairing.

    As permutations, the complement is ``sigma o gamma`` with ``gamma`` the
    cycle ``i -> i + 1 (mod 2m)``; its cycles are the blocks.
    """
    n = 2 * p.m
    partner = p.partner()
    seen = set()
    blocks = []
    for start in range(1, n + 1):
        if start in seen:
            continue
        cyc = []
        i = start
        while i not in seen:
            seen.add(i)
            cyc.append(i)
            i = partner[i % n + 1]
        blocks.append(tuple(sorted(cyc)))
    blocks.sort(key=max)
    t_map = [0] * n
    for idx, b in enumerate(blocks, start=1):
        for i in b:
            t_map[i - 1] = idx
    return KrewerasBlocks(tuple(blocks), tuple(t_map))


def _s_array(p: PairPartition, bound: int) -> np.ndarray:
    """Rows of ``S(sigma) cap [-bound, bound]^{2m}``, shape ``(count, 2m)``."""
    kb = kreweras(p)
    rng = np.arange(-bound, bound + 1)
    free = [b[:-1] for b in kb.blocks]
    free_cols = [c for f in free for c in f]
    if free_cols:
        grids = np.meshgrid(*([rng] * len(free_cols)), indexing="ij")
        vals = np.stack([g.ravel() for g in grids], axis=1)
    else:
        vals = np.zeros((1, 0), dtype=int)
    out = np.zeros((vals.shape[0], 2 * p.m), dtype=np.int64)
    for col, pos in enumerate(free_cols):
        out[:, pos - 1] = vals[:, col]
    keep = np.ones(vals.shape[0], dtype=bool)
    for b in kb.blocks:
        last = -out[:, [i - 1 for i in b[:-1]]].sum(axis=1) if len(b) > 1 else np.zeros(vals.shape[0], int)
        out[:, b[-1] - 1] = last
        keep &= np.abs(last) <= bound
    return out[keep]


def enumerate_S(p: PairPartition, bound: int) -> Iterator[tuple]:
    """Tuples ``k in [-bound, bound]^{2m}`` whose entries sum to zero on every Kreweras block."""
    for row in _s_array(p, bound):
        yield tuple(int(v) for v in row)


def beta_moment(t: FourierTable, m: int) -> float:
    """``beta_{n,2m}``: 2m-th moment of the truncated-model limit law.

    ``sum_sigma sum_{k in S(sigma)} prod_{(u,v)} [fh(k_u, -k_v) + fh(k_v, -k_u)]``
    with ``fh`` the truncated autocovariance of the table.
    """
    if not 1 <= m <= MAX_BETA_M:
        raise ValueError(f"beta_moment supports 1 <= m <= {MAX_BETA_M}")
    n = t.n
    bound = 2 * n
    F = autocovariance_table(t)  # F[u + 2n, v + 2n]
    # G[a, b] = fh(a, -b) + fh(b, -a) for |a|, |b| <= 2n
    G = F[:, ::-1] + F[:, ::-1].T
    total = 0.0
    for sigma in enumerate_nc2(m):
        ks = _s_array(sigma, bound) + bound
        prod = np.ones(ks.shape[0])
        for u, v in sigma.pairs:
            prod *= G[ks[:, u - 1], ks[:, v - 1]]
        total += float(np.sum(prod))
    return total


def _einsum_spec(p: PairPartition) -> str:
    kb = kreweras(p)
    letters = string.ascii_lowercase
    terms = [letters[kb.t_map[u - 1] - 1] + letters[kb.t_map[v - 1] - 1] for u, v in p.pairs]
    return ",".join(terms) + "->"


def l_sigma_integral(f: SpectralDensity, p: PairPartition, grid: int | None = None) -> float:
    """``int_{[-pi,pi]^{m+1}} L_{sigma,f}(x) dx`` by midpoint tensor quadrature.

    ``L`` is a product over pairs of ``F[x_T(u), x_T(v)]`` with
    ``F(a, b) = f(a, -b) + f(-b, a)``, so the integral is a tensor
    contraction of copies of the sampled ``F``.
    """
    m = p.m
    if m > MAX_L_M:
        raise ValueError(f"l_sigma_integral is limited to m <= {MAX_L_M} (cost grows as grid^(m+1))")
    if math.isinf(f.sup()):
        raise ValueError("l_sigma_integral requires a bounded density")
    G = grid or L_GRID[m]
    g = midpoints(G)
    a, b = g[:, None], g[None, :]
    F = f(a, -b) + f(-b, a)
    if not np.all(np.isfinite(F)):
        raise ValueError("density is not finite on the quadrature grid")
    value = np.einsum(_einsum_spec(p), *([F] * m), optimize=True)
    return float(value) * (2.0 * math.pi / G) ** (m + 1)


def theorem_t2_moment(f: SpectralDensity, m: int, grid: int | None = None) -> float:
    """``(2 pi)^{m-1} sum_sigma int L_{sigma,f}`` for a bounded density, ``m <= 3``."""
    if not 1 <= m <= MAX_L_M:
        raise ValueError(f"theorem_t2_moment supports 1 <= m <= {MAX_L_M}")
    total = sum(l_sigma_integral(f, sigma, grid) for sigma in enumerate_nc2(m))
    return (2.0 * math.pi) ** (m - 1) * total
