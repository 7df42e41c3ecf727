"""Closed-form moment predictions from free probability.

Only what is needed against a standard semicircle: moments of ``WSL(gamma)``,
of the law ``eta_r`` of ``2^{3/2} pi r(U)`` (``U`` uniform on [-pi, pi]),
and the moment formula for ``eta (free mult.) WSL(1)`` written as a sum over
non-crossing pairings of products of ``eta`` moments indexed by Kreweras
block sizes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import DivergentMomentError
from .nc_comb import MAX_ENUM_M, catalan, enumerate_nc2, kreweras
from .spectral_measure import SpectralDensity, midpoints

MAX_K = 8
ETA_SCALE = 2.0 ** 1.5 * math.pi
DIVERGENCE_CAP = 1e12
_CUTOFFS = (1e-3, 1e-6, 1e-9, 1e-12)


@dataclass(frozen=True)
class MomentSequence:
    """Moments ``m_1..m_K`` of a law on the real line (``K <= 8``)."""

    moments: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.moments)
        if len(vals) > MAX_K:
            raise ValueError(f"at most {MAX_K} moments are kept")
        object.__setattr__(self, "moments", vals)

    @property
    def K(self) -> int:
        return len(self.moments)

    def __getitem__(self, k: int) -> float:
        """The moment of order ``k`` (1-based); order 0 is 1."""
        if k == 0:
            return 1.0
        if not 1 <= k <= self.K:
            raise ValueError(f"moment of order {k} not available (have 1..{self.K})")
        return self.moments[k - 1]

    @classmethod
    def point_mass(cls, x: float = 1.0, K: int = MAX_K) -> "MomentSequence":
        return cls(tuple(x ** k for k in range(1, K + 1)))

    def scaled(self, c: float) -> "MomentSequence":
        """Moments of ``c X``."""
        return MomentSequence(tuple(c ** k * v for k, v in enumerate(self.moments, start=1)))


def wsl_moments(gamma: float, K: int = MAX_K) -> MomentSequence:
    """Semicircle law of variance ``gamma``: ``m_{2j} = Catalan(j) gamma^j``, odd moments zero."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return MomentSequence(tuple(
        catalan(k // 2) * gamma ** (k // 2) if k % 2 == 0 else 0.0 for k in range(1, K + 1)))


def _truncated(g: Callable, eps: float, points: Sequence[float]) -> float:
    # integral of g over [-pi, pi] with eps-neighbourhoods of the points removed
    cuts = sorted(set(float(p) for p in points if -math.pi < p < math.pi))
    edges = [-math.pi]
    for p in cuts:
        edges += [p - eps, p + eps]
    edges.append(math.pi)
    total = 0.0
    for lo, hi in zip(edges[::2], edges[1::2]):
        if hi > lo:
            total += integrate.quad(g, lo, hi, limit=200)[0]
    return total


def eta_moments(r: Callable, K: int = 4, points: Sequence[float] = (0.0,)) -> MomentSequence:
    """Moments ``(2 pi)^{-1} int (2^{3/2} pi r(x))^k dx`` for ``k = 1..K``.

    ``points`` lists the possible singularities of ``r``.  Each moment is
    recomputed with shrinking neighbourhoods of those points excised; if the
    increments stop shrinking (or the value passes ``1e12``) the moment is
    declared infinite and :class:`DivergentMomentError` names its order.
    """
    if not 1 <= K <= MAX_K:
        raise ValueError(f"K must be in 1..{MAX_K}")
    out = []
    for k in range(1, K + 1):
        def g(x, k=k):
            return float(ETA_SCALE * np.asarray(r(x), dtype=float)) ** k

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            vals = [_truncated(g, eps, points) for eps in _CUTOFFS]
        steps = np.abs(np.diff(vals))
        last = vals[-1]
        if not math.isfinite(last) or abs(last) > DIVERGENCE_CAP:
            raise DivergentMomentError(k, last / (2.0 * math.pi))
        if steps[-1] > 1e-6 * max(1.0, abs(last)) and steps[-1] >= 0.9 * steps[-2]:
            raise DivergentMomentError(k, math.inf)
        # converged: the full integral with breakpoints handles integrable singularities
        inner = [float(p) for p in points if -math.pi < p < math.pi]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            full = integrate.quad(g, -math.pi, math.pi, points=inner or None, limit=400)[0]
        out.append((full if math.isfinite(full) else last) / (2.0 * math.pi))
    return MomentSequence(tuple(out))


def free_mult_semicircle(eta: MomentSequence, m: int) -> float:
    """``2m``-th moment of ``eta (free mult.) WSL(1)``.

    Sum over non-crossing pairings of the product of ``eta`` moments of the
    Kreweras block sizes.
    """
    if not 1 <= m <= MAX_ENUM_M:
        raise ValueError(f"m must be in 1..{MAX_ENUM_M}")
    total = 0.0
    for sigma in enumerate_nc2(m):
        total += math.prod(eta[size] for size in kreweras(sigma).sizes)
    return total


def product_law_bw_moments(m: int) -> float:
    """``E[(2 pi B W)^{2m}]`` for ``B ~ Bernoulli(1/2)`` independent of ``W ~ WSL(1)``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return (2.0 * math.pi) ** (2 * m) * 0.5 * catalan(m)


def check_product_form(f: SpectralDensity, r: Callable, M: int = 256, tol: float = 1e-6) -> bool:
    """Whether ``(f(x, y) + f(y, x)) / 2 == r(x) r(y)`` on the midpoint grid, to ``tol``.

    Grid points where either side is infinite are skipped.
    """
    g = midpoints(M)
    x, y = g[:, None], g[None, :]
    sym = 0.5 * (f(x, y) + f(y, x))
    rg = np.asarray(r(g), dtype=float)
    prod = rg[:, None] * rg[None, :]
    ok = np.isfinite(sym) & np.isfinite(prod)
    if not ok.any():
        return False
    return bool(np.max(np.abs(sym[ok] - prod[ok])) <= tol)
