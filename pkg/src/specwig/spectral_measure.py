"""Spectral measures on (-pi, pi]^2 and the Fourier data derived from them.

A spectral measure is ``ac + d``: an even density ``f`` on the square plus a
finite list of atoms.  Everything downstream (field sampling, moment engines,
the limiting eigen measure) reads its inputs from here.

Densities are callables ``f(x, y)`` that broadcast over numpy arrays.  The
registered families carry closed forms (or exact one-dimensional reductions)
for the quantities that a uniform grid cannot resolve near singularities.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import EvennessError, QuadratureError

TWO_PI = 2.0 * math.pi

GRID_M = 256
EVEN_TOL = 1e-8
T4_TOL = 1e-10
_REFINE_TOL = 1e-6
_LINE_M = 4096
_GL_NODES = 4096


def midpoints(M: int) -> np.ndarray:
    """Cell midpoints of the uniform M-cell partition of [-pi, pi]."""
    return -math.pi + (np.arange(M) + 0.5) * (TWO_PI / M)


def wrap(theta):
    """Reduce angles into [-pi, pi)."""
    return np.mod(np.asarray(theta, dtype=float) + math.pi, TWO_PI) - math.pi


@functools.lru_cache(maxsize=4)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def power_fourier(p: Fraction, k) -> np.ndarray:
    """``int_{-pi}^{pi} |z|^{-p} cos(k z) dz`` for rational ``0 <= p < 1``.

    The substitution ``z = t**q`` with ``q = p.denominator`` turns the
    integrand into ``q t**(q-1-a) cos(k t**q)`` with a non-negative integer
    exponent, which Gauss-Legendre integrates to machine precision.
    """
    p = Fraction(p)
    if not 0 <= p < 1:
        raise ValueError("power must lie in [0, 1)")
    a, q = p.numerator, p.denominator
    nodes, weights = _gauss_legendre(_GL_NODES)
    top = math.pi ** (1.0 / q)
    t = 0.5 * top * (nodes + 1.0)
    w = 0.5 * top * weights * q * t ** (q - 1 - a)
    k = np.asarray(k, dtype=float)
    vals = np.cos(np.multiply.outer(k, t ** q)) @ w
    return 2.0 * vals


def line_fourier(g: Callable, k, M: int = _LINE_M) -> np.ndarray:
    """``int_{-pi}^{pi} e^{-ikz} g(z) dz`` for a smooth periodic ``g`` (midpoint rule)."""
    z = midpoints(M)
    gz = np.asarray(g(z), dtype=float)
    k = np.asarray(k, dtype=float)
    vals = np.exp(-1j * np.multiply.outer(k, z)) @ gz
    return vals * (TWO_PI / M)


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------


class SpectralDensity:
    """A non-negative even density on [-pi, pi]^2.

    Parameters
    ----------
    func : callable
        ``func(x, y)`` evaluated elementwise on broadcast arrays.
    grid_resolution : int
        Samples per axis for tensor-grid quadrature.
    name : str
        Registry name (informational).

    Subclasses override the ``*_closed`` hooks when an exact form exists;
    they return ``None`` otherwise and the generic quadrature is used.
    """

    singular = False
    symmetric = False

    def __init__(self, func: Callable | None = None, grid_resolution: int = GRID_M, name: str = "callable"):
        if grid_resolution < 2:
            raise ValueError("grid_resolution must be >= 2")
        self._func = func
        self.grid_resolution = int(grid_resolution)
        self.name = name

    def __call__(self, x, y):
        return np.asarray(self._func(x, y), dtype=float)

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r})"

    def sup(self) -> float:
        """Essential supremum, or ``inf`` when unbounded.  Generic: grid estimate."""
        g = midpoints(self.grid_resolution)
        return float(np.max(self(g[:, None], g[None, :])))

    def on_grid(self, M: int | None = None) -> np.ndarray:
        g = midpoints(M or self.grid_resolution)
        return np.broadcast_to(self(g[:, None], g[None, :]), (g.size, g.size))

    def check_even(self, M: int | None = None) -> float:
        """Return the max evenness residue on a midpoint grid; raise if above tolerance."""
        vals = self.on_grid(M or self.grid_resolution)
        flipped = vals[::-1, ::-1]
        ok = np.isfinite(vals) & np.isfinite(flipped)
        if np.any(vals[ok] < 0):
            raise ValueError(f"density {self.name!r} takes negative values")
        scale = 1.0 + np.abs(vals[ok])
        residue = float(np.max(np.abs(vals[ok] - flipped[ok]) / scale)) if ok.any() else 0.0
        if residue > EVEN_TOL:
            raise EvennessError(f"density {self.name!r} is not even", residue)
        return residue

    # closed-form hooks
    def l1_closed(self):
        return None

    def covariance_closed(self, u: int, v: int):
        return None

    def sqrt_coeffs_closed(self, n: int):
        return None


class ConstantDensity(SpectralDensity):
    symmetric = True

    def __init__(self, value: float = 1.0 / (8.0 * math.pi ** 2), grid_resolution: int = GRID_M):
        if value < 0:
            raise ValueError("constant density must be non-negative")
        super().__init__(None, grid_resolution, "constant")
        self.value = float(value)

    def __call__(self, x, y):
        return np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, self.value)

    def sup(self):
        return self.value

    def l1_closed(self):
        return self.value * TWO_PI ** 2

    def covariance_closed(self, u, v):
        return self.value * TWO_PI ** 2 if u == 0 and v == 0 else 0.0

    def sqrt_coeffs_closed(self, n):
        c = np.zeros((2 * n + 1, 2 * n + 1))
        c[n, n] = math.sqrt(self.value) * TWO_PI
        return FourierTable(n, c)


class BoxIndicatorDensity(SpectralDensity):
    """``height * 1(|x| <= w, |y| <= w)``."""

    symmetric = True

    def __init__(self, half_width: float = math.pi / 2, height: float = 1.0, grid_resolution: int = GRID_M):
        if not 0 < half_width <= math.pi or height < 0:
            raise ValueError("need 0 < half_width <= pi and height >= 0")
        super().__init__(None, grid_resolution, "box_indicator")
        self.half_width = float(half_width)
        self.height = float(height)

    def __call__(self, x, y):
        w = self.half_width
        return self.height * ((np.abs(x) <= w) & (np.abs(y) <= w)).astype(float)

    def _line(self, k):
        k = np.asarray(k, dtype=float)
        w = self.half_width
        safe = np.where(k == 0, 1.0, k)
        return np.where(k == 0, 2.0 * w, 2.0 * np.sin(k * w) / safe)

    def r(self, x):
        """One-dimensional factor with ``f(x, y) = r(x) r(y)``."""
        return math.sqrt(self.height) * (np.abs(x) <= self.half_width).astype(float)

    def sup(self):
        return self.height

    def l1_closed(self):
        return self.height * (2.0 * self.half_width) ** 2

    def covariance_closed(self, u, v):
        return float(self.height * self._line(u) * self._line(v))

    def sqrt_coeffs_closed(self, n):
        a = self._line(np.arange(-n, n + 1))
        return FourierTable(n, math.sqrt(self.height) * np.outer(a, a) / TWO_PI)


class InvSqrtXYDensity(SpectralDensity):
    """``scale * |x y|^{-1/2}``; unbounded, infinite L^2 norm."""

    singular = True
    symmetric = True

    def __init__(self, scale: float = 1.0, grid_resolution: int = GRID_M):
        if scale < 0:
            raise ValueError("scale must be non-negative")
        super().__init__(None, grid_resolution, "inv_sqrt_xy")
        self.scale = float(scale)

    def __call__(self, x, y):
        with np.errstate(divide="ignore"):
            return self.scale / np.sqrt(np.abs(np.asarray(x, float) * np.asarray(y, float)))

    def r(self, x):
        with np.errstate(divide="ignore"):
            return math.sqrt(self.scale) / np.sqrt(np.abs(np.asarray(x, float)))

    def sup(self):
        return math.inf

    def l1_closed(self):
        return self.scale * (4.0 * math.sqrt(math.pi)) ** 2

    def covariance_closed(self, u, v):
        return float(self.scale * power_fourier(Fraction(1, 2), u) * power_fourier(Fraction(1, 2), v))

    def sqrt_coeffs_closed(self, n):
        a = power_fourier(Fraction(1, 4), np.arange(-n, n + 1))
        return FourierTable(n, math.sqrt(self.scale) * np.outer(a, a) / TWO_PI)


class ShiftedDensity(SpectralDensity):
    """``(2 pi)^{-1} h(x + y)`` with ``h`` even and 2pi-periodic.

    This is the spectral density of ``X[j, k] = G[k][j - k]`` built from
    i.i.d. copies of a one-dimensional stationary process with spectral
    density ``h``.  All Fourier data reduce to one-dimensional integrals
    along the diagonal, so coefficients ``c[k, l]`` vanish off ``k == l``.

    ``kind`` selects ``h``: ``"inv_sqrt"`` (``scale |z|^{-1/2}``),
    ``"cosine"`` (``scale (1 + rho cos z)``) or ``"callable"`` (``h`` given).
    """

    symmetric = True

    def __init__(self, kind: str = "cosine", rho: float = 0.5, scale: float = 1.0,
                 h: Callable | None = None, grid_resolution: int = GRID_M):
        super().__init__(None, grid_resolution, "shifted_1d")
        if kind not in ("inv_sqrt", "cosine", "callable"):
            raise ValueError(f"unknown shifted_1d kind {kind!r}")
        if kind == "cosine" and not -1.0 <= rho <= 1.0:
            raise ValueError("cosine kind needs |rho| <= 1 for non-negativity")
        if kind == "callable" and h is None:
            raise ValueError("kind='callable' needs h")
        self.kind = kind
        self.rho = float(rho)
        self.scale = float(scale)
        self._h = h
        self.singular = kind == "inv_sqrt"

    def h(self, z):
        z = wrap(z)
        if self.kind == "inv_sqrt":
            with np.errstate(divide="ignore"):
                return self.scale / np.sqrt(np.abs(z))
        if self.kind == "cosine":
            return self.scale * (1.0 + self.rho * np.cos(z))
        return np.asarray(self._h(z), dtype=float)

    def __call__(self, x, y):
        return self.h(np.asarray(x, float) + np.asarray(y, float)) / TWO_PI

    def sup(self):
        if self.kind == "inv_sqrt":
            return math.inf
        if self.kind == "cosine":
            return self.scale * (1.0 + abs(self.rho)) / TWO_PI
        return float(np.max(self.h(midpoints(_LINE_M)))) / TWO_PI

    def _h_fourier(self, k):
        """``int e^{-ikz} h(z) dz``, real by evenness."""
        k = np.asarray(k)
        if self.kind == "inv_sqrt":
            return self.scale * power_fourier(Fraction(1, 2), k)
        if self.kind == "cosine":
            ka = np.abs(k)
            return self.scale * np.where(ka == 0, TWO_PI, np.where(ka == 1, math.pi * self.rho, 0.0))
        return line_fourier(self.h, k).real

    def _sqrt_h_fourier(self, k):
        if self.kind == "inv_sqrt":
            return math.sqrt(self.scale) * power_fourier(Fraction(1, 4), k)
        return line_fourier(lambda z: np.sqrt(self.h(z)), k).real

    def l1_closed(self):
        return float(self._h_fourier(0))

    def covariance_closed(self, u, v):
        return float(self._h_fourier(u)) if u == v else 0.0

    def sqrt_coeffs_closed(self, n):
        diag = self._sqrt_h_fourier(np.arange(-n, n + 1)) / math.sqrt(TWO_PI)
        return FourierTable(n, np.diag(diag))


class TrigPolySquareDensity(SpectralDensity):
    """``[(2 pi)^{-1} sum c[k,l] e^{i(kx+ly)}]^2`` for a symmetric real table.

    When the inner trigonometric polynomial is non-negative the square root
    of the density is that polynomial divided by 2pi, so the table itself is
    the coefficient table of ``sqrt(f)``.
    """

    def __init__(self, table: "FourierTable", grid_resolution: int = GRID_M):
        super().__init__(None, grid_resolution, "trig_poly_sq")
        c = table.c
        if not np.allclose(c, c[::-1, ::-1], rtol=0, atol=1e-14):
            raise EvennessError("coefficient table must satisfy c[-k,-l] == c[k,l]",
                                float(np.max(np.abs(c - c[::-1, ::-1]))))
        self.table = table
        self.symmetric = bool(np.allclose(c, c.T, rtol=0, atol=1e-14))
        g = midpoints(max(64, 8 * table.n + 8))
        self.nonnegative_root = bool(np.min(self.poly(g[:, None], g[None, :])) >= 0)

    def poly(self, x, y):
        n = self.table.n
        ks = np.arange(-n, n + 1)
        x = np.asarray(x, float)[..., None, None]
        y = np.asarray(y, float)[..., None, None]
        phase = ks[:, None] * x + ks[None, :] * y
        return np.sum(self.table.c * np.cos(phase), axis=(-2, -1))

    def __call__(self, x, y):
        return (self.poly(x, y) / TWO_PI) ** 2

    def sup(self):
        return float(np.max(self.on_grid(max(64, 8 * self.table.n + 8))))

    def l1_closed(self):
        return self.table.sum_squares()

    def covariance_closed(self, u, v):
        return truncated_autocovariance(self.table, u, v)

    def sqrt_coeffs_closed(self, n):
        if not self.nonnegative_root:
            return None
        return self.table.resized(n)


class GridDensity(SpectralDensity):
    """Piecewise-constant density given by its values at the M x M cell midpoints."""

    def __init__(self, values):
        values = np.array(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError("grid density needs a square M x M array")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("grid density values must be finite and non-negative")
        super().__init__(None, values.shape[0], "grid")
        values.setflags(write=False)
        self.values = values
        self.symmetric = bool(np.allclose(values, values.T))

    @classmethod
    def from_csv(cls, path):
        """Load a row-major M x M table of non-negative reals."""
        return cls(np.loadtxt(path, delimiter=",", ndmin=2))

    def to_csv(self, path):
        np.savetxt(path, self.values, delimiter=",", fmt="%.17g")

    def _cell(self, t):
        M = self.grid_resolution
        idx = np.floor((np.asarray(t, float) + math.pi) * M / TWO_PI).astype(int)
        return np.clip(idx, 0, M - 1)

    def __call__(self, x, y):
        return self.values[self._cell(x), self._cell(y)]

    def on_grid(self, M=None):
        if M is None or M == self.grid_resolution:
            return self.values
        return super().on_grid(M)

    def sup(self):
        return float(self.values.max())

    def l1_closed(self):
        return float(self.values.sum()) * (TWO_PI / self.grid_resolution) ** 2


def make_density(name: str, **params) -> SpectralDensity:
    """Build a registered density from its config name and parameters."""
    if name == "constant":
        return ConstantDensity(**params)
    if name == "box_indicator":
        return BoxIndicatorDensity(**params)
    if name == "inv_sqrt_xy":
        return InvSqrtXYDensity(**params)
    if name == "shifted_1d":
        return ShiftedDensity(**params)
    if name == "trig_poly_sq":
        params = dict(params)
        coeffs = np.asarray(params.pop("coeffs"), dtype=float)
        return TrigPolySquareDensity(FourierTable((coeffs.shape[0] - 1) // 2, coeffs), **params)
    if name == "grid":
        if "path" in params:
            return GridDensity.from_csv(params["path"])
        return GridDensity(params["values"])
    raise ValueError(f"unknown density {name!r}; known: {', '.join(DENSITY_NAMES)}")


DENSITY_NAMES = ("constant", "box_indicator", "inv_sqrt_xy", "shifted_1d", "trig_poly_sq", "grid")


# ---------------------------------------------------------------------------
# atoms and measures
# ---------------------------------------------------------------------------


def _as_angle(value):
    """Accept radians (float) or an exact multiple of pi (Fraction / [p, q] pair)."""
    if isinstance(value, Fraction):
        frac = value
    elif isinstance(value, (list, tuple)) and len(value) == 2:
        frac = Fraction(int(value[0]), int(value[1]))
    else:
        rad = float(value)
        wrapped = float(-wrap(-rad))  # into (-pi, pi]
        return wrapped, None
    # reduce into (-1, 1]
    frac = frac - 2 * math.floor((frac + 1) / 2)
    if frac == -1:
        frac = Fraction(1)
    return float(frac) * math.pi, frac


@dataclass(frozen=True)
class Atom:
    """Atom of weight ``a`` standing for ``a/2`` at (x, y) and ``a/2`` at (-x, -y)."""

    x: float
    y: float
    a: float
    x_pi: Fraction | None = None
    y_pi: Fraction | None = None

    @classmethod
    def make(cls, x, y, a):
        """``x``/``y`` may be radians or exact multiples of pi (``Fraction`` or ``[p, q]``)."""
        xr, xf = _as_angle(x)
        yr, yf = _as_angle(y)
        a = float(a)
        if not (a >= 0 and math.isfinite(a)):
            raise ValueError("atom weight must be finite and non-negative")
        return cls(xr, yr, a, xf, yf)

    @property
    def x_freq(self):
        return self.x_pi if self.x_pi is not None else self.x

    @property
    def y_freq(self):
        return self.y_pi if self.y_pi is not None else self.y


@dataclass(frozen=True)
class AtomSet:
    atoms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        for at in self.atoms:
            if not isinstance(at, Atom):
                raise TypeError("AtomSet holds Atom instances")

    @classmethod
    def of(cls, triples: Iterable) -> "AtomSet":
        return cls(tuple(Atom.make(*t) for t in triples))

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __getitem__(self, i):
        return self.atoms[i]

    def head(self, n: int) -> "AtomSet":
        return AtomSet(self.atoms[:n])

    def total_mass(self) -> float:
        return float(sum(at.a for at in self.atoms))

    def tail_mass(self, n: int) -> float:
        """Weight left out by truncating to the first ``n`` atoms."""
        return float(sum(at.a for at in self.atoms[n:]))


@dataclass(frozen=True)
class SpectralMeasure:
    ac: SpectralDensity | None = None
    d: AtomSet = field(default_factory=AtomSet)

    def __post_init__(self):
        if not isinstance(self.d, AtomSet):
            object.__setattr__(self, "d", AtomSet(tuple(self.d)))
        if self.ac is None and len(self.d) == 0:
            raise ValueError("spectral measure needs a density or at least one atom")
        if self.ac is not None:
            self.ac.check_even()

    def total_mass(self) -> float:
        dens = l1_norm(self.ac) if self.ac is not None else 0.0
        return dens + self.d.total_mass()


# ---------------------------------------------------------------------------
# Fourier tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FourierTable:
    """Real coefficients ``c[k, l]`` for ``|k|, |l| <= n``; ``c`` is indexed with offset n."""

    n: int
    c: np.ndarray

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if self.n < 0 or c.shape != (2 * self.n + 1, 2 * self.n + 1):
            raise ValueError(f"table for n={self.n} must be {(2 * self.n + 1,) * 2}, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    def __eq__(self, other):
        if not isinstance(other, FourierTable):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.c, other.c)

    def __hash__(self):
        return hash((self.n, self.c.tobytes()))

    def __getitem__(self, kl):
        k, l = kl
        if abs(k) > self.n or abs(l) > self.n:
            return 0.0
        return float(self.c[k + self.n, l + self.n])

    def sum_squares(self) -> float:
        return float(np.sum(self.c ** 2))

    def resized(self, n: int) -> "FourierTable":
        """Truncate or zero-pad to radius ``n``."""
        out = np.zeros((2 * n + 1, 2 * n + 1))
        m = min(n, self.n)
        out[n - m:n + m + 1, n - m:n + m + 1] = self.c[self.n - m:self.n + m + 1, self.n - m:self.n + m + 1]
        return FourierTable(n, out)

    @classmethod
    def iid(cls, n: int = 0, variance: float = 0.5) -> "FourierTable":
        c = np.zeros((2 * n + 1, 2 * n + 1))
        c[n, n] = math.sqrt(variance)
        return cls(n, c)


def random_positive_table(n: int, rng: np.random.Generator, spread: float = 1.0) -> FourierTable:
    """Random symmetric table whose trig polynomial is strictly positive.

    Off-centre entries are uniform in ``[-spread, spread]`` (mirrored so that
    ``c[-k,-l] == c[k,l]``) and the centre dominates their absolute sum.
    """
    size = 2 * n + 1
    raw = rng.uniform(-spread, spread, size=(size, size))
    c = 0.5 * (raw + raw[::-1, ::-1])
    c[n, n] = 0.0
    c[n, n] = np.sum(np.abs(c)) + rng.uniform(0.5, 1.5) * spread
    return FourierTable(n, c)


def _grid_sqrt_coeffs(f: SpectralDensity, n: int, M: int) -> FourierTable:
    vals = f.on_grid(M)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError(
            f"density {f.name!r} is infinite on the midpoint grid; use its closed form", math.inf)
    root = np.sqrt(vals)
    g = midpoints(M)
    ks = np.arange(-n, n + 1)
    E = np.exp(-1j * np.outer(ks, g))
    c = E @ root @ E.T * (TWO_PI / M) ** 2 / TWO_PI
    residue = float(np.max(np.abs(c.imag))) if c.size else 0.0
    if residue > EVEN_TOL:
        raise EvennessError(f"imaginary residue in coefficients of {f.name!r}", residue)
    return FourierTable(n, c.real)


def sqrt_density_coeffs(f: SpectralDensity | None, n: int, M: int | None = None,
                        method: str = "auto") -> FourierTable:
    """Fourier coefficients of ``sqrt(f)``, ``(2 pi)^{-1} int e^{-i(kx+ly)} sqrt(f)``.

    ``method="auto"`` uses the density's exact form when it has one and the
    midpoint tensor grid otherwise; ``method="quadrature"`` forces the grid.
    A missing density yields the zero table.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if f is None:
        return FourierTable(n, np.zeros((2 * n + 1, 2 * n + 1)))
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        closed = f.sqrt_coeffs_closed(n)
        if closed is not None:
            return closed
    return _grid_sqrt_coeffs(f, n, M or f.grid_resolution)


def autocovariance_table(t: FourierTable) -> np.ndarray:
    """All ``f_hat_n(u, v)`` for ``|u|, |v| <= 2n``, indexed with offset 2n."""
    from scipy.signal import correlate2d

    # correlate2d(c, c)[u + 2n, v + 2n] = sum c[k+u, l+v] c[k, l]
    return correlate2d(t.c, t.c, mode="full")


def truncated_autocovariance(t: FourierTable, u: int, v: int) -> float:
    """``sum_{k,l} c[k,l] c[k+u,l+v]`` over the table support."""
    n = t.n
    if abs(u) > 2 * n or abs(v) > 2 * n:
        return 0.0
    c = t.c
    size = 2 * n + 1
    a0, a1 = max(0, -u), min(size, size - u)
    b0, b1 = max(0, -v), min(size, size - v)
    return float(np.sum(c[a0:a1, b0:b1] * c[a0 + u:a1 + u, b0 + v:b1 + v]))


def _grid_integral(f: SpectralDensity, weight, M):
    vals = f.on_grid(M)
    g = midpoints(M)
    if weight is None:
        return float(np.sum(vals)) * (TWO_PI / M) ** 2
    return float(np.sum(vals * weight(g[:, None], g[None, :]))) * (TWO_PI / M) ** 2


def _refined_integral(f: SpectralDensity, weight=None, M=None, what="integral"):
    M = M or f.grid_resolution
    fine = _grid_integral(f, weight, M)
    if isinstance(f, GridDensity):
        return fine
    coarse = _grid_integral(f, weight, M // 2)
    residual = abs(fine - coarse)
    if not math.isfinite(fine) or residual > _REFINE_TOL * max(1.0, abs(fine)):
        raise QuadratureError(f"{what} of density {f.name!r} did not converge on a {M}-grid", residual)
    return fine


def covariance(m: SpectralMeasure, u: int, v: int, M: int | None = None) -> float:
    """``R(u, v) = int e^{i(ux+vy)} nu(dx, dy)``."""
    total = 0.0
    f = m.ac
    if f is not None:
        closed = f.covariance_closed(u, v)
        if closed is None:
            closed = _refined_integral(
                f, lambda x, y: np.cos(u * x + v * y), M, what=f"covariance at lag ({u},{v})")
        total += closed
    for at in m.d:
        total += at.a * math.cos(u * at.x + v * at.y)
    return float(total)


def l1_norm(f: SpectralDensity) -> float:
    """``int |f|`` over the square (closed form for registered singular families)."""
    closed = f.l1_closed()
    if closed is not None:
        return float(closed)
    return _refined_integral(f, None, what="L1 norm")


# ---------------------------------------------------------------------------
# semicircle sufficient condition
# ---------------------------------------------------------------------------


def t4_coefficients(f: SpectralDensity, n: int, M: int | None = None) -> FourierTable:
    """``d[j,k] = (2 sqrt2 pi)^{-1} int e^{-i(jx+ky)} sqrt(f(x,y) + f(y,x))``.

    For a density symmetric under ``(x, y) -> (y, x)`` these are the
    coefficients of ``sqrt(f)``.
    """
    if f.symmetric:
        return sqrt_density_coeffs(f, n, M)

    M = M or f.grid_resolution
    sym = SpectralDensity(lambda x, y: 0.5 * (f(x, y) + f(y, x)), M, name=f"sym({f.name})")
    return _grid_sqrt_coeffs(sym, n, M)


def check_t4_condition(d, windows: Sequence[Iterable[int]], scan: int | None = None,
                       tol: float = T4_TOL) -> bool:
    """True iff every windowed lagged sum ``sum d[k,l] d[j+k,l] 1(k,l,j+k in A)`` vanishes.

    ``d`` is a :class:`FourierTable` or a square array indexed with offset
    ``(size-1)//2``.  Lags ``0 < |j| <= scan`` are checked (default: the
    full support width).
    """
    c = d.c if isinstance(d, FourierTable) else np.asarray(d, dtype=float)
    r = (c.shape[0] - 1) // 2
    scan = 2 * r if scan is None else scan
    ks = np.arange(-r, r + 1)
    for window in windows:
        A = set(int(a) for a in window)
        inA = np.array([k in A for k in ks])
        masked = c * inA[:, None] * inA[None, :]  # k and l in A
        for j in range(-scan, scan + 1):
            if j == 0:
                continue
            lo, hi = max(0, -j), min(2 * r + 1, 2 * r + 1 - j)
            if lo >= hi:
                continue
            # rows k (masked, k and l in A) against rows k + j (k + j in A)
            shifted = c[lo + j:hi + j, :] * inA[lo + j:hi + j, None]
            s = float(np.sum(masked[lo:hi, :] * shifted))
            if abs(s) >= tol:
                return False
    return True
