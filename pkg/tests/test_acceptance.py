"""End-to-end acceptance checks, one test per criterion.

Seeds are fixed up front; every test prints and records a single
``CRITERION <k> PASS|FAIL`` line before asserting.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from specwig.discrete_limit import cesaro_limit
from specwig.eig import eigenvalues, trace_power
from specwig.harness import run
from specwig.nc_comb import PairPartition, beta_moment, enumerate_nc2, kreweras, theorem_t2_moment
from specwig.spectra_stats import PointMeasure, dp_distance, em_from_spectrum
from specwig.spectral_measure import (
    DENSITY_NAMES,
    TrigPolySquareDensity,
    l1_norm,
    make_density,
    midpoints,
    random_positive_table,
)

from conftest import ACCEPTANCE_LINES
from oracles import all_pairings, cesaro_partial, is_noncrossing, kreweras_by_maximality

pytestmark = pytest.mark.acceptance

SEED = 20261015
N_BIG = 1024


def verdict(k, ok, detail):
    line = f"CRITERION {k} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def _density(name, **params):
    return {"density": {"name": name, "params": params}}


def _failed_stats(rep):
    out = [f"{s['name']}" for s in rep.stats if s["pass"] is False]
    out += [f"{s['name']}@N={e['N']}" for e in rep.per_N for s in e["stats"] if s["pass"] is False]
    return out


def _summary(rep, names):
    parts = []
    for e in rep.per_N:
        for s in e["stats"]:
            if s["name"] in names:
                parts.append(f"{s['name']}@{e['N']}={float(s['empirical']):.4g} (theory {float(s['theory']):.4g})")
    return "; ".join(parts)


def test_criterion_01_combinatorics():
    t0 = time.perf_counter()
    counts = []
    ok = True
    for m in range(1, 7):
        brute = {tuple(sorted(p)) for p in all_pairings(range(1, 2 * m + 1)) if is_noncrossing(p)}
        got = {p.pairs for p in enumerate_nc2(m)}
        ok &= got == brute
        counts.append(len(got))
    ok &= counts == [1, 2, 5, 14, 42, 132]
    ok &= kreweras(PairPartition(3, ((1, 4), (2, 3), (5, 6)))).t_map[0] == 2
    for m in (1, 2, 3):
        for sigma in enumerate_nc2(m):
            expected, _ = kreweras_by_maximality(sigma.pairs, m)
            ok &= sorted(kreweras(sigma).blocks) == expected
    elapsed = time.perf_counter() - t0
    verdict(1, ok and elapsed < 5, f"counts {counts}, kreweras checked for m <= 3, {elapsed:.2f}s")


def test_criterion_02_moment_engines_agree():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for n in (1, 2, 3):
        table = random_positive_table(n, rng)
        f = TrigPolySquareDensity(table)
        for m in (1, 2, 3):
            b, L = beta_moment(table, m), theorem_t2_moment(f, m)
            worst = max(worst, abs(b - L) / abs(b))
    elapsed = time.perf_counter() - t0
    verdict(2, worst < 1e-3 and elapsed < 60, f"max relative gap {worst:.2e}, {elapsed:.1f}s")


def test_criterion_03_semicircle():
    t0 = time.perf_counter()
    details, ok = [], True
    for exp in ("semicircle_t4", "corollary_5"):
        rep = run({"experiment": exp, "N": [N_BIG], "trials": 8, "seed": SEED})
        ok &= rep.passed is True
        details.append(f"{exp}: {_summary(rep, {'ks_to_semicircle', 'm2', 'm4'})} failed={_failed_stats(rep)}")
    elapsed = time.perf_counter() - t0
    verdict(3, ok and elapsed < 300, " | ".join(details) + f" ({elapsed:.0f}s)")


def test_criterion_04_truncated_model_moments():
    table = random_positive_table(2, np.random.default_rng(SEED))
    rep = run({"experiment": "esd_vs_beta", "measure": _density("trig_poly_sq", coeffs=table.c.tolist()),
               "N": [N_BIG], "truncation_n": 2, "trials": 16, "seed": SEED, "max_moment": 3})
    zs = [float((s["empirical"] - s["theory"]) / s["stderr"]) for s in rep.per_N[0]["stats"]]
    detail = _summary(rep, {"m2", "m4", "m6"}) + f"; z-scores {[round(z, 2) for z in zs]}"
    verdict(4, rep.passed is True, detail)


def _registered_densities():
    g = midpoints(64)
    x, y = np.meshgrid(g, g, indexing="ij")
    grid = (1 + 0.5 * np.cos(x) * np.cos(y) + 0.3 * np.cos(x + 2 * y)) / (4 * math.pi ** 2)
    table = random_positive_table(2, np.random.default_rng(SEED + 1))
    specs = {
        "constant": [{}],
        "box_indicator": [{}],
        "inv_sqrt_xy": [{}],
        "shifted_1d": [{"kind": "inv_sqrt"}, {"kind": "cosine"}],
        "trig_poly_sq": [{"coeffs": table.c.tolist()}],
        "grid": [{"values": grid.tolist()}],
    }
    assert set(specs) == set(DENSITY_NAMES)
    return [(name, p) for name in DENSITY_NAMES for p in specs[name]]


def test_criterion_05_second_moment():
    details, ok = [], True
    for name, params in _registered_densities():
        rep = run({"experiment": "second_moment_t6", "measure": _density(name, **params),
                   "N": [N_BIG], "trials": 2, "seed": SEED})
        s = rep.per_N[0]["stats"][0]
        ok &= s["pass"] is True
        label = name + (f"/{params['kind']}" if "kind" in params else "")
        details.append(f"{label} {float(s['empirical']):.4g} vs {s['theory']:.4g}")
    # the singular one-dimensional example has total mass 4 sqrt(pi), so m2 = 8 sqrt(pi)
    ok &= math.isclose(2 * l1_norm(make_density("shifted_1d", kind="inv_sqrt")), 8 * math.sqrt(math.pi))
    verdict(5, ok, "; ".join(details))


def test_criterion_06_box_indicator():
    rep = run({"experiment": "example_2", "N": [N_BIG], "trials": 8, "seed": SEED, "max_moment": 2})
    detail = (_summary(rep, {"m2", "m4", "zero_fraction", "zero_fraction_limit_law"})
              + f"; failed={_failed_stats(rep)}")
    verdict(6, rep.passed is True, detail)


def test_criterion_07_heavy_tail():
    rep = run({"experiment": "example_3", "N": [256, 512, 1024], "trials": 16, "seed": SEED,
               "truncation_fraction": 0.25})
    detail = _summary(rep, {"m2", "m4"}) + f"; failed={_failed_stats(rep)}"
    verdict(7, rep.passed is True, detail)


def test_criterion_08_coupling():
    t0 = time.perf_counter()
    rep = run({"experiment": "em_coupling_t7", "measure": {"atoms": [{"x": [1, 3], "y": [7, 5], "a": 1.0}]},
               "N": [200, 400, 800], "trials": 10, "seed": SEED})
    passing = rep.stat("coupled_trials_passing")["empirical"]
    elapsed = time.perf_counter() - t0
    d = [[round(v, 4) for v in t["d2"]] for t in rep.notes[-1]["trials"]]
    verdict(8, rep.passed is True and elapsed < 120, f"{passing}/10 draws pass; d2 per draw {d} ({elapsed:.0f}s)")


def test_criterion_09_nondegenerate_limit():
    rep = run({"experiment": "xi_nondegenerate_t8", "measure": {"atoms": [{"x": [1, 3], "y": [7, 5], "a": 1.0}]},
               "trials": 200, "seed": SEED})
    mn = rep.stat("min_second_moment")["empirical"]
    cv = rep.stat("coefficient_of_variation")["empirical"]
    verdict(9, rep.passed is True, f"min {mn:.4g}, coefficient of variation {cv:.3f}")


def _random_point_measure(rng):
    return PointMeasure.from_values(rng.standard_normal(int(rng.integers(0, 12))) * rng.uniform(0.1, 5))


def test_criterion_10_metric_and_trace_invariants():
    rng = np.random.default_rng(SEED)
    fails = []
    for _ in range(100):
        x, y, z = (_random_point_measure(rng) for _ in range(3))
        for p in (2, 4):
            dxy, dyx = dp_distance(x, y, p), dp_distance(y, x, p)
            if dp_distance(x, x, p) != 0 or not math.isclose(dxy, dyx, rel_tol=1e-12):
                fails.append("identity/symmetry")
            if dp_distance(x, z, p) > dxy + dp_distance(y, z, p) + 1e-12:
                fails.append("triangle")
            same = np.array_equal(x.pos, y.pos) and np.array_equal(x.neg, y.neg)
            if dxy == 0 and not same:
                fails.append("separation")
    for _ in range(100):
        x, y = _random_point_measure(rng), _random_point_measure(rng)
        for p in (2, 4):
            gap = abs(x.abs_moment(p) ** (1 / p) - y.abs_moment(p) ** (1 / p))
            if gap > dp_distance(x, y, p) + 1e-12:
                fails.append("moment bound")
    for _ in range(20):
        n = int(rng.integers(2, 40))
        a = rng.standard_normal((n, n))
        b = rng.standard_normal((n, n)) * rng.uniform(0.01, 2)
        a, b = a + a.T, a + a.T + b + b.T
        for p in (2, 4):
            d = dp_distance(em_from_spectrum(eigenvalues(a), 1.0), em_from_spectrum(eigenvalues(b), 1.0), p)
            if d > trace_power(a - b, p) ** (1 / p) * (1 + 1e-10):
                fails.append("trace inequality")
        lam = eigenvalues(a).values
        for p in (1, 2, 3, 4):
            tr = trace_power(a, p)
            # odd traces can vanish; compare against the size of the terms
            if abs(np.sum(lam ** p) - tr) > 1e-8 * max(abs(tr), np.sum(np.abs(lam) ** p)):
                fails.append(f"trace identity p={p}")
    verdict(10, not fails, "all invariants hold" if not fails else f"violations: {sorted(set(fails))}")


def test_criterion_11_cesaro():
    rng = np.random.default_rng(SEED)
    special = [Fraction(0), Fraction(1), Fraction(-1)]
    pairs = []
    for i in range(50):
        wa = Fraction(int(rng.integers(-12, 13)), int(rng.integers(1, 9)))
        if i < 10:
            wa = special[i % 3] if i < 6 else wa
            wb = wa if i % 2 == 0 else -wa
        elif i < 15:
            wb = special[i % 3]
        else:
            wb = Fraction(int(rng.integers(-12, 13)), int(rng.integers(1, 9)))
        pairs.append((wa, wb))
    # resonant and boundary pairs get matching kinds so their limits are not trivially zero
    kinds = [("cos", "cos") if i % 4 < 2 else ("sin", "sin") for i in range(15)]
    kinds += list(itertools.islice(itertools.cycle(itertools.product(("cos", "sin"), repeat=2)), 35))
    worst, resonant = 0.0, 0
    for (wa, wb), (ka, kb) in zip(pairs, kinds):
        ref = cesaro_partial(ka, float(wa) * math.pi, kb, float(wb) * math.pi)
        val = cesaro_limit(ka, wa, kb, wb)
        resonant += val != 0
        worst = max(worst, abs(val - ref))
    verdict(11, worst < 2e-3, f"50 pairs ({resonant} with a non-zero limit), max gap {worst:.2e}")
