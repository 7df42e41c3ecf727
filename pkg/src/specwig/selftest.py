"""Fast built-in checks: combinatorics against brute force, moment engines, eigensolver, Cesaro limits."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy import integrate

from .discrete_limit import cesaro_limit, harmonic_factorization
from .eig import eigenvalues, trace_power
from .field_sim import harmonic_sum
from .free_prob import free_mult_semicircle, MomentSequence, wsl_moments
from .nc_comb import PairPartition, beta_moment, catalan, enumerate_nc2, kreweras, theorem_t2_moment
from .spectral_measure import AtomSet, ConstantDensity, FourierTable, TrigPolySquareDensity, random_positive_table
from .spectra_stats import wsl_pdf


def _all_pairings(points):
    if not points:
        yield ()
        return
    a = points[0]
    for j in range(1, len(points)):
        rest = points[1:j] + points[j + 1:]
        for p in _all_pairings(rest):
            yield ((a, points[j]),) + p


def _crosses(p):
    return any(a < b < c < d for (a, c) in p for (b, d) in p)


def check_nc2_counts():
    for m in range(1, 7):
        brute = sum(1 for p in _all_pairings(tuple(range(1, 2 * m + 1))) if not _crosses(p))
        if brute != len(enumerate_nc2(m)) or brute != catalan(m):
            return False
    return True


def check_kreweras_example():
    kb = kreweras(PairPartition(3, ((1, 4), (2, 3), (5, 6))))
    return kb.t_map == (2, 1, 2, 4, 3, 4) and kb.blocks == ((2,), (1, 3), (5,), (4, 6))


def check_beta_vs_integral():
    ok = abs(beta_moment(FourierTable.iid(0), 2) - 2.0) < 1e-12
    ok &= abs(theorem_t2_moment(ConstantDensity(), 2) - 2.0) < 1e-9
    t = random_positive_table(1, np.random.default_rng(0))
    f = TrigPolySquareDensity(t)
    for m in (1, 2):
        b, i = beta_moment(t, m), theorem_t2_moment(f, m)
        ok &= abs(b - i) <= 1e-3 * abs(b)
    return bool(ok)


def check_trace_identities():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((40, 40))
    a = a + a.T
    lam = eigenvalues(a).values
    return all(abs(np.sum(lam ** p) - trace_power(a, p)) <= 1e-8 * max(1.0, abs(trace_power(a, p)))
               for p in (1, 2, 3, 4))


def check_cesaro():
    k = np.arange(1, 200_001, dtype=float)
    cases = [("cos", Fraction(1, 2), "cos", Fraction(1, 2)), ("cos", Fraction(1), "cos", Fraction(1)),
             ("sin", Fraction(1, 3), "sin", Fraction(-1, 3)), ("sin", Fraction(2, 7), "cos", Fraction(2, 7))]
    for ka, wa, kb, wb in cases:
        fa = np.cos if ka == "cos" else np.sin
        fb = np.cos if kb == "cos" else np.sin
        partial = np.mean(fa(k * float(wa) * math.pi) * fb(k * float(wb) * math.pi))
        if abs(partial - cesaro_limit(ka, wa, kb, wb)) > 2e-3:
            return False
    return True


def check_semicircle_moments():
    x = np.linspace(-2, 2, 200_001)
    pdf = wsl_pdf(1.0)(x)
    m = wsl_moments(1.0, 6)
    return all(abs(integrate.trapezoid(x ** k * pdf, x) - m[k]) < 1e-4 for k in (2, 4, 6))


def check_free_identity():
    delta = MomentSequence.point_mass(1.0)
    return all(abs(free_mult_semicircle(delta, m) - catalan(m)) < 1e-12 for m in range(1, 5))


def check_reconstruction():
    atoms = AtomSet.of([([1, 3], [7, 5], 0.7), (0.4, -1.1, 1.3)])
    v = np.random.default_rng(2).standard_normal((2, 2))
    h = harmonic_factorization(atoms, v, 2)
    z = harmonic_sum(atoms, v, 20)
    return float(np.max(np.abs(h.reconstruct(20) - (z + z.T)))) < 1e-10


CHECKS = {
    "nc2 counts vs brute force": check_nc2_counts,
    "kreweras worked example": check_kreweras_example,
    "lattice sum vs integral moments": check_beta_vs_integral,
    "eigenvalue trace identities": check_trace_identities,
    "cesaro limits vs partial sums": check_cesaro,
    "semicircle moments vs quadrature": check_semicircle_moments,
    "free product with point mass": check_free_identity,
    "harmonic factorization": check_reconstruction,
}


def run_selftest(out=print) -> bool:
    ok = True
    for name, fn in CHECKS.items():
        try:
            passed = bool(fn())
        except Exception as exc:  # report and keep going
            passed = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        ok &= passed
        out(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
