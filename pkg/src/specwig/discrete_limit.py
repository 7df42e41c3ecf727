"""Finite-dimensional model of the limiting eigen measure of a harmonic field.

With atoms truncated to the first ``n``, the symmetrised harmonic matrix
factors as ``B_N P B_N^T``: each atom contributes four rank-two terms
``Y_k (u_k v_k^T + v_k u_k^T)`` whose columns are sampled cosines/sines.
``B_N^T B_N / N`` has an explicit Cesaro limit ``C_n``, so the eigen measure
of ``W / N`` tends to that of ``C_n^{1/2} P C_n^{1/2}``, an ``8n x 8n`` matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .eig import eigenvalues
from .errors import NotPSDError
from .field_sim import FieldSamplerConfig, assemble_wigner, draw_v, harmonic_sum, GaussianField
from .spectra_stats import PointMeasure, em_from_spectrum
from .spectral_measure import AtomSet, SpectralMeasure

RESONANCE_TOL = 1e-12
PSD_TOL = 1e-10

COS, SIN = "cos", "sin"


@dataclass(frozen=True)
class HarmonicFactorization:
    """Signed amplitudes ``ys`` and, per amplitude, the column pair ``((kind, w), (kind, z))``.

    Frequencies are ``Fraction`` multiples of pi when the atom was given
    exactly, radians otherwise.
    """

    ys: np.ndarray
    cols: tuple

    def __len__(self):
        return len(self.cols)

    def column(self, kind, w, N: int) -> np.ndarray:
        idx = np.arange(1, N + 1, dtype=float)
        fn = np.cos if kind == COS else np.sin
        return fn(idx * _radians(w))

    def design_matrix(self, N: int) -> np.ndarray:
        """``B_N``: columns ``sqrt|Y_k| u_k`` and ``sqrt|Y_k| v_k`` interleaved, shape ``(N, 8n)``."""
        out = np.empty((N, 2 * len(self)))
        for k, (y, (ca, cb)) in enumerate(zip(self.ys, self.cols)):
            s = math.sqrt(abs(y))
            out[:, 2 * k] = s * self.column(*ca, N)
            out[:, 2 * k + 1] = s * self.column(*cb, N)
        return out

    def signature(self) -> np.ndarray:
        """``P``: block diagonal with ``[[0, s], [s, 0]]``, ``s = sgn(Y_k)``."""
        K = len(self)
        P = np.zeros((2 * K, 2 * K))
        for k, y in enumerate(self.ys):
            s = float(np.sign(y))
            P[2 * k, 2 * k + 1] = s
            P[2 * k + 1, 2 * k] = s
        return P

    def reconstruct(self, N: int) -> np.ndarray:
        """``sum_k Y_k (u_k(i) v_k(j) + v_k(i) u_k(j))`` for ``i, j = 1..N``."""
        B = self.design_matrix(N)
        return B @ self.signature() @ B.T


def _radians(w) -> float:
    return float(w) * math.pi if isinstance(w, Fraction) else float(w)


def harmonic_factorization(atoms: AtomSet, v: np.ndarray, n: int) -> HarmonicFactorization:
    """Four signed terms per atom for the first ``min(n, len(atoms))`` atoms."""
    v = np.asarray(v, dtype=float)
    K = min(n, len(atoms))
    if v.shape[0] != 2 or v.shape[1] < K:
        raise ValueError(f"need V draws of shape (2, >= {K}), got {v.shape}")
    ys = []
    cols = []
    for k in range(K):
        at = atoms[k]
        root = math.sqrt(at.a)
        x, y = at.x_freq, at.y_freq
        v1, v2 = v[0, k], v[1, k]
        ys += [root * v1, -root * v1, root * v2, root * v2]
        cols += [((COS, x), (COS, y)), ((SIN, x), (SIN, y)), ((SIN, x), (COS, y)), ((COS, x), (SIN, y))]
    return HarmonicFactorization(np.array(ys, dtype=float), tuple(cols))


def _is_zero_mod_2pi(theta) -> bool:
    if isinstance(theta, Fraction):
        # theta is a multiple of pi
        return theta.denominator == 1 and theta.numerator % 2 == 0
    t = math.remainder(float(theta), 2.0 * math.pi)
    return abs(t) <= RESONANCE_TOL


def cesaro_limit(kind_a: str, w_a, kind_b: str, w_b) -> float:
    """``lim (1/N) sum_{k<=N} trig_a(k w_a) trig_b(k w_b)``.

    Frequencies given as ``Fraction`` are exact multiples of pi and
    resonance is decided exactly; mixed inputs fall back to radians.
    """
    if kind_a not in (COS, SIN) or kind_b not in (COS, SIN):
        raise ValueError("kinds must be 'cos' or 'sin'")
    if not (isinstance(w_a, Fraction) and isinstance(w_b, Fraction)):
        w_a, w_b = _radians(w_a), _radians(w_b)
    if kind_a != kind_b:
        return 0.0
    diff = 1.0 if _is_zero_mod_2pi(w_a - w_b) else 0.0
    summ = 1.0 if _is_zero_mod_2pi(w_a + w_b) else 0.0
    if kind_a == COS:
        return 0.5 * (diff + summ)
    return 0.5 * (diff - summ)


@dataclass(frozen=True)
class GramLimit:
    c: np.ndarray

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    def sqrt(self) -> np.ndarray:
        """Symmetric PSD square root; eigenvalues above ``-1e-10`` are clamped to zero."""
        if self.c.size == 0:
            return self.c.copy()
        w, q = np.linalg.eigh(self.c)
        if w[0] < -PSD_TOL:
            raise NotPSDError(float(w[0]))
        root = np.sqrt(np.clip(w, 0.0, None))
        return (q * root) @ q.T


def gram_limit(h: HarmonicFactorization) -> GramLimit:
    """``C_n[a, b] = sqrt(|Y_a||Y_b|) * cesaro(column_a, column_b)`` over the interleaved columns."""
    K = len(h)
    flat = [c for pair in h.cols for c in pair]
    amp = np.sqrt(np.abs(np.repeat(h.ys, 2)))
    C = np.zeros((2 * K, 2 * K))
    for a in range(2 * K):
        for b in range(a, 2 * K):
            val = cesaro_limit(flat[a][0], flat[a][1], flat[b][0], flat[b][1])
            if val:
                C[a, b] = C[b, a] = amp[a] * amp[b] * val
    return GramLimit(C)


def _xi_from_factorization(h: HarmonicFactorization) -> PointMeasure:
    if len(h) == 0:
        return PointMeasure(np.empty(0), np.empty(0))
    root = gram_limit(h).sqrt()
    M = root @ h.signature() @ root
    M = 0.5 * (M + M.T)
    return em_from_spectrum(eigenvalues(M), scaling=1.0)


def draw_atom_amplitudes(atoms: AtomSet, n: int, seed: int, trial: int = 0) -> np.ndarray:
    """The V draws a harmonic field with these atoms would use for ``(seed, trial)``."""
    if len(atoms) == 0:
        return np.zeros((2, 0))
    cfg = FieldSamplerConfig(SpectralMeasure(None, atoms), n, seed, trial)
    return draw_v(cfg)


def sample_xi(atoms: AtomSet, n: int, seed: int, trial: int = 0, v: np.ndarray | None = None) -> PointMeasure:
    """One draw of ``xi_n = EM(C_n^{1/2} P C_n^{1/2})``.

    ``v`` overrides the amplitude draws so that ``xi_n`` can be coupled to a
    finite-N harmonic matrix sampled with the same V's.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if v is None:
        v = draw_atom_amplitudes(atoms, n, seed, trial)
    return _xi_from_factorization(harmonic_factorization(atoms, v, n))


def harmonic_em(atoms: AtomSet, v: np.ndarray, N: int) -> PointMeasure:
    """``EM(W / N)`` for the symmetrised harmonic matrix built from the given V draws."""
    z = harmonic_sum(atoms, np.asarray(v, dtype=float), N)
    w = assemble_wigner(GaussianField(z, 0, v.shape[1]))
    return em_from_spectrum(eigenvalues(w), scaling=float(N))


def xi_second_moment_stat(atoms: AtomSet, n: int, trials: int, seed: int) -> np.ndarray:
    """``int x^2 xi_n(dx)`` for ``trials`` independent draws."""
    if len(atoms) == 0 or atoms.head(n).total_mass() <= 0:
        raise ValueError("need at least one atom with positive weight")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return np.array([sample_xi(atoms, n, seed, t).abs_moment(2) for t in range(trials)])
