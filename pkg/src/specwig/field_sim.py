"""Sampling the stationary field X = Y + Z and assembling symmetric matrices.

``Y`` is the truncated moving average of i.i.d. normals with the
coefficients of ``sqrt(f)``; ``Z`` is the random trigonometric sum carried by
the atoms.  Randomness comes from counter-based Philox streams keyed by
``(seed, trial, stream)`` so ``Y`` and ``Z`` use independent substreams and
the ``Z`` amplitudes can be re-drawn exactly for coupling experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import fftconvolve

from .spectral_measure import AtomSet, FourierTable, SpectralMeasure, sqrt_density_coeffs

STREAM_U = 0
STREAM_V = 1

DEFAULT_N_SMOOTH = 16
DEFAULT_N_SINGULAR = 64


def substream(seed: int, stream: int, trial: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, trial, stream)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial), int(stream)))
    return np.random.Generator(np.random.Philox(ss))


def default_truncation(measure: SpectralMeasure) -> int:
    f = measure.ac
    if f is not None and (f.singular or not math.isfinite(f.sup())):
        return DEFAULT_N_SINGULAR
    return DEFAULT_N_SMOOTH


@dataclass(frozen=True)
class FieldSamplerConfig:
    measure: SpectralMeasure
    truncation_n: int
    seed: int
    trial: int = 0

    def __post_init__(self):
        if self.truncation_n < 0:
            raise ValueError("truncation_n must be >= 0")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def with_trial(self, trial: int) -> "FieldSamplerConfig":
        return replace(self, trial=trial)


@dataclass(frozen=True)
class GaussianField:
    values: np.ndarray
    seed: int
    truncation_n: int
    trial: int = 0
    v_draws: np.ndarray | None = field(default=None, compare=False)

    @property
    def N(self) -> int:
        return self.values.shape[0]

    def __add__(self, other: "GaussianField") -> "GaussianField":
        v = self.v_draws if self.v_draws is not None else other.v_draws
        return GaussianField(self.values + other.values, self.seed, self.truncation_n, self.trial, v)

    def to_csv(self, path):
        np.savetxt(path, self.values, delimiter=",", fmt="%.17g")


@dataclass(frozen=True)
class SymmetricMatrix:
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("symmetric matrix must be square")
        if not np.array_equal(a, a.T):
            raise ValueError("matrix is not exactly symmetric")
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def to_csv(self, path):
        np.savetxt(path, self.entries, delimiter=",", fmt="%.17g")


def draw_u(cfg: FieldSamplerConfig, N: int) -> np.ndarray:
    n = cfg.truncation_n
    return substream(cfg.seed, STREAM_U, cfg.trial).standard_normal((N + 2 * n, N + 2 * n))


def draw_v(cfg: FieldSamplerConfig) -> np.ndarray:
    """The (2, K) amplitudes ``V[0, k], V[1, k]`` for the first K atoms used."""
    k = min(cfg.truncation_n, len(cfg.measure.d))
    return substream(cfg.seed, STREAM_V, cfg.trial).standard_normal((2, k))


def sample_ac_field(cfg: FieldSamplerConfig, N: int, table: FourierTable | None = None) -> GaussianField:
    """Moving average ``Y[i,j] = sum_{|k|,|l|<=n} c[k,l] U[i-k, j-l]`` for ``1 <= i, j <= N``.

    ``table`` may be passed to reuse precomputed coefficients; it must have
    radius ``cfg.truncation_n``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    n = cfg.truncation_n
    if table is None:
        table = sqrt_density_coeffs(cfg.measure.ac, n)
    elif table.n != n:
        raise ValueError("table radius does not match truncation_n")
    if not np.any(table.c):
        return GaussianField(np.zeros((N, N)), cfg.seed, n, cfg.trial)
    u = draw_u(cfg, N)
    if n == 0:
        y = table.c[0, 0] * u
    else:
        # window [1-n, N+n]^2 of U; 'valid' keeps exactly the N x N interior
        y = fftconvolve(u, table.c, mode="valid")
    return GaussianField(y, cfg.seed, n, cfg.trial)


def harmonic_sum(atoms: AtomSet, v: np.ndarray, N: int) -> np.ndarray:
    """``Z[i,j] = sum_k sqrt(a_k) (V1 cos(i x_k + j y_k) + V2 sin(i x_k + j y_k))``, i, j = 1..N."""
    k = v.shape[1]
    if k == 0:
        return np.zeros((N, N))
    idx = np.arange(1, N + 1, dtype=float)
    xs = np.array([at.x for at in atoms.atoms[:k]])
    ys = np.array([at.y for at in atoms.atoms[:k]])
    amp = np.sqrt([at.a for at in atoms.atoms[:k]])
    cx, sx = np.cos(np.outer(idx, xs)), np.sin(np.outer(idx, xs))
    cy, sy = np.cos(np.outer(idx, ys)), np.sin(np.outer(idx, ys))
    d1 = amp * v[0]
    d2 = amp * v[1]
    # cos(a+b) = cos a cos b - sin a sin b ; sin(a+b) = sin a cos b + cos a sin b
    return (cx * d1) @ cy.T - (sx * d1) @ sy.T + (sx * d2) @ cy.T + (cx * d2) @ sy.T


def sample_discrete_field(cfg: FieldSamplerConfig, N: int) -> GaussianField:
    """Harmonic field from the first ``truncation_n`` atoms; V draws kept on ``v_draws``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    v = draw_v(cfg)
    z = harmonic_sum(cfg.measure.d, v, N)
    return GaussianField(z, cfg.seed, cfg.truncation_n, cfg.trial, v)


def sample_field(cfg: FieldSamplerConfig, N: int, table: FourierTable | None = None) -> GaussianField:
    """``X = Y + Z`` with whichever components the measure has."""
    out = None
    if cfg.measure.ac is not None:
        out = sample_ac_field(cfg, N, table)
    if len(cfg.measure.d):
        z = sample_discrete_field(cfg, N)
        out = z if out is None else out + z
    return out


def assemble_wigner(fld: GaussianField) -> SymmetricMatrix:
    """``W[i, j] = X[i, j] + X[j, i]``."""
    x = fld.values
    return SymmetricMatrix(x + x.T)


def scale(matrix: SymmetricMatrix, factor: float) -> SymmetricMatrix:
    return SymmetricMatrix(matrix.entries * float(factor))
