import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from specwig.errors import EvennessError, QuadratureError
from specwig.spectral_measure import (
    Atom,
    AtomSet,
    BoxIndicatorDensity,
    ConstantDensity,
    FourierTable,
    GridDensity,
    InvSqrtXYDensity,
    ShiftedDensity,
    SpectralDensity,
    SpectralMeasure,
    TrigPolySquareDensity,
    check_t4_condition,
    covariance,
    l1_norm,
    make_density,
    midpoints,
    power_fourier,
    random_positive_table,
    sqrt_density_coeffs,
    t4_coefficients,
    truncated_autocovariance,
)

TWO_PI = 2 * math.pi


def _smooth_grid(M=64):
    g = midpoints(M)
    X, Y = np.meshgrid(g, g, indexing="ij")
    return (1 + 0.5 * np.cos(X) * np.cos(Y) + 0.3 * np.cos(X + 2 * Y)) / (4 * math.pi ** 2)


def test_power_fourier_against_quad():
    for p in (Fraction(1, 2), Fraction(1, 4), Fraction(0)):
        for k in (0, 1, 3, 10):
            ref = 2 * integrate.quad(lambda z: z ** (-float(p)) * math.cos(k * z), 0, math.pi, limit=500)[0]
            assert power_fourier(p, k) == pytest.approx(ref, rel=1e-8, abs=1e-10)
    with pytest.raises(ValueError):
        power_fourier(Fraction(1), 0)


@pytest.mark.parametrize("f", [
    ConstantDensity(),
    BoxIndicatorDensity(),
    ShiftedDensity("cosine", rho=0.7),
    TrigPolySquareDensity(random_positive_table(2, np.random.default_rng(0))),
])
def test_closed_form_coefficients_match_quadrature(f):
    closed = sqrt_density_coeffs(f, 3)
    grid = sqrt_density_coeffs(f, 3, M=512, method="quadrature")
    # the box indicator has jumps, so the midpoint rule converges only to O(1/M)
    tol = 2e-2 if isinstance(f, BoxIndicatorDensity) else 1e-8
    np.testing.assert_allclose(closed.c, grid.c, atol=tol)


@pytest.mark.parametrize("f,l1", [
    (ConstantDensity(), 0.5),
    (BoxIndicatorDensity(), math.pi ** 2),
    (InvSqrtXYDensity(), 16 * math.pi),
    (ShiftedDensity("inv_sqrt"), 4 * math.sqrt(math.pi)),
    (ShiftedDensity("cosine", rho=0.3, scale=2.0), 4 * math.pi),
])
def test_l1_norms(f, l1):
    assert l1_norm(f) == pytest.approx(l1, rel=1e-10)


@pytest.mark.parametrize("f,n,rel", [
    (ConstantDensity(), 0, 1e-12),
    (TrigPolySquareDensity(random_positive_table(2, np.random.default_rng(1))), 2, 1e-12),
    (ShiftedDensity("cosine"), 8, 1e-8),
    (InvSqrtXYDensity(), 64, 3e-2),
])
def test_parseval(f, n, rel):
    t = sqrt_density_coeffs(f, n)
    assert t.sum_squares() == pytest.approx(l1_norm(f), rel=rel)
    assert t.sum_squares() <= l1_norm(f) * (1 + 1e-9)


def test_covariance_closed_forms_vs_dblquad():
    # integrate over the support so the box's jumps sit on the boundary
    for f, w in ((BoxIndicatorDensity(half_width=1.0), 1.0), (ShiftedDensity("cosine", rho=0.4), math.pi)):
        m = SpectralMeasure(f)
        for u, v in [(0, 0), (1, 0), (2, 1), (1, 1)]:
            ref = integrate.dblquad(lambda y, x: float(f(x, y)) * math.cos(u * x + v * y),
                                    -w, w, -w, w, epsabs=1e-9)[0]
            assert covariance(m, u, v) == pytest.approx(ref, abs=1e-6)


def test_covariance_generic_quadrature_and_atoms():
    f = SpectralDensity(lambda x, y: 1.0 + 0.5 * np.cos(x) * np.cos(y), name="cos")
    m = SpectralMeasure(f, AtomSet.of([([1, 2], [1, 3], 0.5)]))
    # density part: 4 pi^2 at (0, 0), pi^2/2 ... at (1, 1)
    assert covariance(m, 0, 0) == pytest.approx(4 * math.pi ** 2 + 0.5, rel=1e-9)
    expected = 0.5 * math.pi ** 2 + 0.5 * math.cos(math.pi / 2 + math.pi / 3)
    assert covariance(m, 1, 1) == pytest.approx(expected, rel=1e-9)


def test_truncated_autocovariance_converges_to_covariance():
    f = ShiftedDensity("cosine", rho=0.5)
    m = SpectralMeasure(f)
    t = sqrt_density_coeffs(f, 20)
    for u in (0, 1, 2):
        assert truncated_autocovariance(t, u, u) == pytest.approx(covariance(m, u, u), abs=1e-8)
    assert truncated_autocovariance(t, 1, 0) == pytest.approx(0.0, abs=1e-12)
    assert truncated_autocovariance(t, 100, 0) == 0.0


def test_grid_density_roundtrip_and_quadrature(tmp_path):
    vals = _smooth_grid()
    f = GridDensity(vals)
    assert f.check_even() < 1e-12
    assert l1_norm(f) == pytest.approx(1.0, rel=1e-12)
    path = tmp_path / "grid.csv"
    f.to_csv(path)
    g = GridDensity.from_csv(path)
    np.testing.assert_array_equal(g.values, f.values)
    t = sqrt_density_coeffs(g, 3)
    assert t.sum_squares() <= l1_norm(g) + 1e-12
    with pytest.raises(ValueError):
        GridDensity(-vals)


def test_evenness_checks():
    odd = SpectralDensity(lambda x, y: 1.0 + 0.5 * np.sin(x), name="odd")
    with pytest.raises(EvennessError):
        SpectralMeasure(odd)
    neg = SpectralDensity(lambda x, y: np.cos(x), name="neg")
    with pytest.raises(ValueError):
        neg.check_even()
    with pytest.raises(EvennessError):
        TrigPolySquareDensity(FourierTable(1, np.arange(9.0).reshape(3, 3)))


def test_singular_density_needs_closed_form():
    def diag(x, y):
        with np.errstate(divide="ignore"):
            return 1 / np.sqrt(np.abs(x + y))

    f = SpectralDensity(diag, name="diag")
    with pytest.raises(QuadratureError):
        sqrt_density_coeffs(f, 2, M=64, method="quadrature")


def test_measure_requires_content():
    with pytest.raises(ValueError):
        SpectralMeasure()
    m = SpectralMeasure(None, AtomSet.of([(0.1, 0.2, 1.0)]))
    assert m.total_mass() == 1.0


def test_atom_angles():
    at = Atom.make([3, 2], [-1, 3], 2.0)
    assert at.x_pi == Fraction(-1, 2) and at.x == pytest.approx(-math.pi / 2)
    assert at.y_pi == Fraction(-1, 3)
    assert Atom.make([1, 1], 0, 1).x_pi == 1
    assert Atom.make([-1, 1], 0, 1).x_pi == 1
    assert Atom.make(3 * math.pi, 0.0, 1).x == pytest.approx(math.pi)
    with pytest.raises(ValueError):
        Atom.make(0, 0, -1)
    atoms = AtomSet.of([(0, 0, 1), (0.5, 0.5, 2), (1, 1, 3)])
    assert atoms.tail_mass(1) == 5 and len(atoms.head(2)) == 2


def test_make_density_registry():
    assert isinstance(make_density("constant"), ConstantDensity)
    f = make_density("trig_poly_sq", coeffs=FourierTable.iid(1).c.tolist())
    assert f.table.n == 1
    with pytest.raises(ValueError):
        make_density("nope")


def test_fourier_table_helpers():
    t = random_positive_table(2, np.random.default_rng(3))
    assert t[5, 0] == 0.0
    assert t.resized(4).resized(2) == t
    np.testing.assert_array_equal(t.c, t.c[::-1, ::-1])
    with pytest.raises(ValueError):
        t.c[0, 0] = 1.0


def test_t4_condition():
    # diagonal coefficient tables never couple distinct rows within a full window
    f = ShiftedDensity("cosine", rho=0.5)
    d = t4_coefficients(f, 4)
    assert check_t4_condition(d, [range(-4, 5)])
    # the box indicator factorises and its coefficients do couple
    d = t4_coefficients(BoxIndicatorDensity(), 4)
    assert not check_t4_condition(d, [range(-4, 5)])
    assert check_t4_condition(FourierTable.iid(3), [range(-3, 4)])
