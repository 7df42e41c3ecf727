"""Empirical spectral distributions, eigen measures and the distances between them."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .eig import EigenSpectrum

ZERO_REL_TOL = 1e-12


@dataclass(frozen=True)
class ESD:
    """Uniform probability measure on ``sample`` (sorted eigenvalues of ``A/scaling``)."""

    sample: np.ndarray
    N: int
    scaling: float = 1.0

    def __post_init__(self):
        s = np.sort(np.asarray(self.sample, dtype=float))
        s.setflags(write=False)
        object.__setattr__(self, "sample", s)

    def moments(self, K: int = 8) -> list[float]:
        return [empirical_moment(self, k) for k in range(1, K + 1)]

    def summary(self, ks: float | None = None) -> dict:
        return {"N": self.N, "scaling": self.scaling, "moments": self.moments(8), "ks": ks}

    def to_csv(self, path):
        _write_column(path, self.sample)

    def to_json(self, path, ks: float | None = None):
        with open(path, "w") as fh:
            json.dump(self.summary(ks), fh, indent=2, sort_keys=True)


def _write_column(path, values):
    np.savetxt(path, np.asarray(values, dtype=float), fmt="%.17g", header="lambda", comments="")


@dataclass(frozen=True)
class PointMeasure:
    """``inf * delta_0 + sum delta_alpha`` with ``pos`` descending >= 0 and ``neg`` ascending <= 0."""

    pos: np.ndarray
    neg: np.ndarray

    def __post_init__(self):
        pos = -np.sort(-np.asarray(self.pos, dtype=float))
        neg = np.sort(np.asarray(self.neg, dtype=float))
        if pos.size and pos[-1] < 0:
            raise ValueError("pos entries must be non-negative")
        if neg.size and neg[-1] > 0:
            raise ValueError("neg entries must be non-positive")
        pos.setflags(write=False)
        neg.setflags(write=False)
        object.__setattr__(self, "pos", pos)
        object.__setattr__(self, "neg", neg)

    @classmethod
    def from_values(cls, values, zero_tol: float = 0.0) -> "PointMeasure":
        v = np.asarray(values, dtype=float)
        v = v[np.abs(v) > zero_tol]
        return cls(v[v > 0], v[v < 0])

    @property
    def atoms(self) -> np.ndarray:
        return np.concatenate([self.pos, self.neg])

    def abs_moment(self, p: float) -> float:
        """``int |x|^p xi(dx)`` (the zero mass contributes nothing)."""
        return float(np.sum(np.abs(self.atoms) ** p))

    def moment(self, k: int) -> float:
        return float(np.sum(self.atoms ** k))

    def to_csv(self, path):
        _write_column(path, self.atoms)


def esd_from_spectrum(s: EigenSpectrum, scaling: float | None = None) -> ESD:
    """ESD of ``A / scaling``; the default scaling is ``sqrt(N)``."""
    scaling = math.sqrt(s.dim) if scaling is None else float(scaling)
    return ESD(np.asarray(s.values) / scaling, s.dim, scaling)


def em_from_spectrum(s: EigenSpectrum, scaling: float | None = None) -> PointMeasure:
    """Eigen measure of ``A / scaling`` (default ``N``).

    Eigenvalues below ``1e-12 * N * max|A_ij|`` in magnitude are numerical
    zeros and join the implicit infinite mass at the origin.
    """
    scaling = float(s.dim) if scaling is None else float(scaling)
    thresh = ZERO_REL_TOL * max(s.dim * s.norm_max, scaling)
    vals = np.asarray(s.values)
    keep = vals[np.abs(vals) > thresh] / scaling
    return PointMeasure(keep[keep > 0], keep[keep < 0])


def dp_distance(x: PointMeasure, y: PointMeasure, p: float = 2) -> float:
    """``[sum_{j != 0} |alpha_j(x) - alpha_j(y)|^p]^{1/p}`` with zero padding."""
    if p < 1:
        raise ValueError("p must be >= 1")

    def gap(a, b):
        size = max(a.size, b.size)
        aa = np.zeros(size)
        bb = np.zeros(size)
        aa[: a.size] = a
        bb[: b.size] = b
        return np.abs(aa - bb)

    g = np.concatenate([gap(x.pos, y.pos), gap(x.neg, y.neg)])
    if g.size == 0:
        return 0.0
    top = g.max()
    if top == 0:
        return 0.0
    return float(top * np.sum((g / top) ** p) ** (1.0 / p))


def empirical_moment(e: ESD, k: int) -> float:
    return float(np.mean(e.sample ** k))


def ks_distance(e: ESD, cdf: Callable) -> float:
    """Sup distance between the empirical CDF and ``cdf``.

    Both one-sided limits are compared at each sample point; the left limit
    of ``cdf`` is taken one ulp below the point.
    """
    s = e.sample
    n = s.size
    right = np.searchsorted(s, s, side="right") / n
    left = np.searchsorted(s, s, side="left") / n
    g_right = np.asarray(cdf(s), dtype=float)
    g_left = np.asarray(cdf(np.nextafter(s, -np.inf)), dtype=float)
    return float(max(np.max(np.abs(right - g_right)), np.max(np.abs(left - g_left))))


def wsl_pdf(gamma: float) -> Callable:
    if gamma <= 0:
        raise ValueError("semicircle variance must be positive")
    root = math.sqrt(gamma)

    def pdf(x):
        x = np.asarray(x, dtype=float)
        inside = np.clip(4.0 - x * x / gamma, 0.0, None)
        return np.sqrt(inside) / (2.0 * math.pi * root)

    return pdf


def wsl_cdf(gamma: float) -> Callable:
    """CDF of the semicircle law with variance ``gamma`` (support ``|x| <= 2 sqrt(gamma)``)."""
    if gamma <= 0:
        raise ValueError("semicircle variance must be positive")
    edge = 2.0 * math.sqrt(gamma)

    def cdf(x):
        t = np.clip(np.asarray(x, dtype=float) / edge, -1.0, 1.0)
        return 0.5 + (t * np.sqrt(1.0 - t * t) + np.arcsin(t)) / math.pi

    return cdf


def empirical_step_cdf(sample) -> Callable:
    s = np.sort(np.asarray(sample, dtype=float))
    return lambda x: np.searchsorted(s, x, side="right") / s.size
