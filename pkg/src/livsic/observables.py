"""Observables on an interval: evaluable function objects plus the
weighted inner-product / quadrature helpers used everywhere else.

All observables evaluate exactly at arbitrary points of their support
(grid functions evaluate as the step function that is constant on each
cell).  Quadrature is the midpoint rule on a uniform grid, which for a
bounded-variation integrand carries an O(1/N) error; every tolerance in
the test suites is budgeted against that rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NotMonotone, ResolutionMismatch

TWO_PI = 2.0 * np.pi

Interval = tuple[float, float]


def midpoints(n: int, support: Interval) -> np.ndarray:
    """Cell midpoints of a uniform n-cell grid on the support interval."""
    lo, hi = support
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def _as_array(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


class Observable:
    """Real-valued function on an interval, evaluable at any point."""

    support: Interval = (0.0, 1.0)

    def __call__(self, x):
        raise NotImplementedError

    def jump_points(self) -> np.ndarray:
        """Discontinuity locations known a priori (may be empty)."""
        return np.empty(0)

    # -- generic arithmetic (kept lazy; FourierSum overrides to stay closed)

    def __add__(self, other):
        return LinComb([1.0, 1.0], [self, _lift(other, self.support)], self.support)

    __radd__ = __add__

    def __sub__(self, other):
        return LinComb([1.0, -1.0], [self, _lift(other, self.support)], self.support)

    def __rsub__(self, other):
        return LinComb([-1.0, 1.0], [self, _lift(other, self.support)], self.support)

    def __mul__(self, c):
        return LinComb([float(c)], [self], self.support)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def to_grid(self, n: int, support: Interval | None = None) -> "GridFunction":
        sup = self.support if support is None else support
        return GridFunction(self(midpoints(n, sup)), sup)


def _lift(value, support):
    if isinstance(value, Observable):
        return value
    return Constant(float(value), support)


@dataclass
class Constant(Observable):
    value: float
    support: Interval = (0.0, 1.0)

    def __call__(self, x):
        x = _as_array(x)
        return np.full(x.shape, self.value)


class FourierSum(Observable):
    """Finite trigonometric sum sum_nu a_nu cos(2 pi nu x) + b_nu sin(2 pi nu x).

    Frequencies are exact rationals so the symbolic operator actions on
    mod-1 and tent maps (which halve / double frequencies) stay exact.
    The constant part is the nu = 0 cosine coefficient.
    """

    def __init__(self, terms=None, support: Interval = (0.0, 1.0)):
        # terms: {Fraction: (cos_coeff, sin_coeff)}
        self.terms: dict[Fraction, tuple[float, float]] = {}
        self.support = support
        if terms:
            for nu, (a, b) in terms.items():
                self._accumulate(Fraction(nu), float(a), float(b))

    def _accumulate(self, nu: Fraction, a: float, b: float):
        if nu < 0:
            raise ValueError("frequencies must be nonnegative")
        ca, cb = self.terms.get(nu, (0.0, 0.0))
        ca, cb = ca + a, cb + b
        if ca == 0.0 and cb == 0.0:
            self.terms.pop(nu, None)
        else:
            self.terms[nu] = (ca, cb)

    @classmethod
    def from_modes(cls, modes, support: Interval = (0.0, 1.0)):
        """modes: iterable of (frequency, cos_coeff, sin_coeff)."""
        out = cls(support=support)
        for nu, a, b in modes:
            out._accumulate(Fraction(nu), float(a), float(b))
        return out

    def __call__(self, x):
        x = _as_array(x)
        out = np.zeros(x.shape)
        for nu, (a, b) in self.terms.items():
            if nu == 0:
                out += a
                continue
            arg = TWO_PI * float(nu) * x
            if a:
                out += a * np.cos(arg)
            if b:
                out += b * np.sin(arg)
        return out

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = FourierSum({Fraction(0): (float(other), 0.0)}, self.support)
        if isinstance(other, Constant):
            other = FourierSum({Fraction(0): (other.value, 0.0)}, self.support)
        if isinstance(other, FourierSum):
            out = FourierSum(self.terms, self.support)
            for nu, (a, b) in other.terms.items():
                out._accumulate(nu, a, b)
            return out
        return super().__add__(other)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (other * -1.0)

    def __mul__(self, c):
        c = float(c)
        return FourierSum(
            {nu: (a * c, b * c) for nu, (a, b) in self.terms.items()}, self.support
        )

    __rmul__ = __mul__

    def constant_part(self) -> float:
        return self.terms.get(Fraction(0), (0.0, 0.0))[0]

    def max_abs_coeff(self) -> float:
        return max(
            (max(abs(a), abs(b)) for a, b in self.terms.values()), default=0.0
        )


@dataclass
class StepFunction(Observable):
    """Right-continuous step function: value[i] on [break[i-1], break[i])."""

    breaks: np.ndarray  # interior breakpoints, strictly increasing
    values: np.ndarray  # len(breaks) + 1 piece values
    support: Interval = (0.0, 1.0)

    def __post_init__(self):
        self.breaks = np.asarray(self.breaks, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if len(self.values) != len(self.breaks) + 1:
            raise ValueError("need one more value than breakpoints")
        if np.any(np.diff(self.breaks) <= 0):
            raise ValueError("breakpoints must be strictly increasing")

    def __call__(self, x):
        x = _as_array(x)
        return self.values[np.searchsorted(self.breaks, x, side="right")]

    def jump_points(self) -> np.ndarray:
        return self.breaks[np.diff(self.values) != 0.0] if len(self.breaks) else self.breaks

    @classmethod
    def indicator(cls, a: float, b: float, support: Interval = (0.0, 1.0)):
        return cls(np.array([a, b]), np.array([0.0, 1.0, 0.0]), support)


@dataclass
class PiecewiseLinear(Observable):
    xs: np.ndarray
    ys: np.ndarray
    support: Interval = (0.0, 1.0)

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.ys = np.asarray(self.ys, dtype=float)

    def __call__(self, x):
        return np.interp(_as_array(x), self.xs, self.ys)


class GridFunction(Observable):
    """Observable sampled at the N midpoints of a uniform grid.

    Evaluation at an arbitrary point reads the value of the cell the
    point falls in (step interpretation, edges belong to the right cell).
    """

    def __init__(self, values, support: Interval = (0.0, 1.0)):
        self.values = np.asarray(values, dtype=float)
        if self.values.ndim != 1 or len(self.values) == 0:
            raise ValueError("grid values must be a nonempty 1-d array")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must be finite")
        self.support = (float(support[0]), float(support[1]))

    @property
    def n(self) -> int:
        return len(self.values)

    def midpoints(self) -> np.ndarray:
        return midpoints(self.n, self.support)

    def cell_index(self, x) -> np.ndarray:
        lo, hi = self.support
        idx = np.floor((_as_array(x) - lo) / (hi - lo) * self.n).astype(np.int64)
        return np.clip(idx, 0, self.n - 1)

    def __call__(self, x):
        return self.values[self.cell_index(x)]

    def jump_points(self) -> np.ndarray:
        lo, hi = self.support
        edges = lo + np.arange(1, self.n) * (hi - lo) / self.n
        return edges[np.diff(self.values) != 0.0]


class Composed(Observable):
    """Lazy exact composition x -> outer(inner(x)).

    Keeping compositions lazy (instead of resampling) is what makes the
    operator identities hold to near machine precision: the inner map is
    applied first and the outer observable is read at that exact point.
    """

    def __init__(self, outer: Observable, inner, support: Interval, jumps=None):
        self.outer = outer
        self.inner = inner  # vectorized callable
        self.support = support
        self._jumps = np.empty(0) if jumps is None else np.asarray(jumps, dtype=float)

    def __call__(self, x):
        return self.outer(self.inner(_as_array(x)))

    def jump_points(self) -> np.ndarray:
        return self._jumps


class LinComb(Observable):
    """Lazy linear combination of observables."""

    def __init__(self, coeffs, parts, support: Interval):
        self.coeffs = [float(c) for c in coeffs]
        self.parts = list(parts)
        self.support = support

    def __call__(self, x):
        x = _as_array(x)
        out = np.zeros(x.shape)
        for c, f in zip(self.coeffs, self.parts):
            out += c * f(x)
        return out

    def jump_points(self) -> np.ndarray:
        pts = [f.jump_points() for f in self.parts]
        pts = [p for p in pts if len(p)]
        return np.unique(np.concatenate(pts)) if pts else np.empty(0)


@dataclass
class Homeomorphism:
    """Strictly monotone change of coordinates with an explicit inverse."""

    forward: callable
    inverse: callable
    domain: Interval
    name: str = "custom"
    check_points: int = field(default=512, repr=False)

    def __post_init__(self):
        xs = np.linspace(self.domain[0], self.domain[1], self.check_points)
        ys = self.forward(xs)
        d = np.diff(ys)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise NotMonotone(f"homeomorphism {self.name!r} is not strictly monotone")
        back = self.inverse(ys)
        scale = self.domain[1] - self.domain[0]
        if np.max(np.abs(back - xs)) > 1e-9 * max(scale, 1.0):
            raise NotMonotone(f"inverse of {self.name!r} fails the round trip")
        self.increasing = bool(d[0] > 0)

    @property
    def range(self) -> Interval:
        a, b = self.forward(np.array(self.domain))
        return (min(a, b), max(a, b))


def identity_homeomorphism(domain: Interval = (0.0, 1.0)) -> Homeomorphism:
    return Homeomorphism(lambda x: np.asarray(x, dtype=float),
                         lambda y: np.asarray(y, dtype=float),
                         domain, name="identity")


def sin_squared_homeomorphism(domain: Interval = (0.0, 1.0)) -> Homeomorphism:
    """H(x) = sin^2(pi x / 2), the classical tent-map change of coordinates."""
    fwd = lambda x: np.sin(0.5 * np.pi * np.asarray(x, dtype=float)) ** 2
    inv = lambda y: (2.0 / np.pi) * np.arcsin(np.sqrt(np.clip(y, 0.0, 1.0)))
    return Homeomorphism(fwd, inv, domain, name="sin_squared")


def transport(u: Observable, h: Homeomorphism) -> Observable:
    """The observable x -> u(h(x)); grid functions are re-sampled at the same N.

    The sampled p-variation is unchanged under this operation when the
    sample points are pulled through h as well.
    """
    jumps = u.jump_points()
    tj = np.sort(h.inverse(jumps)) if len(jumps) else np.empty(0)
    a, b = h.inverse(np.array(u.support))
    sup = (min(a, b), max(a, b))
    if isinstance(u, GridFunction):
        xs = midpoints(u.n, sup)
        return GridFunction(u(h.forward(xs)), sup)
    return Composed(u, h.forward, sup, jumps=tj)


# ---------------------------------------------------------------------------
# quadrature against the invariant density


def _operand_values(f, n: int, support: Interval) -> np.ndarray:
    if isinstance(f, np.ndarray):
        if len(f) != n:
            raise ResolutionMismatch(f"array of length {len(f)} on an {n}-cell grid")
        return f
    if isinstance(f, GridFunction):
        if f.n != n or f.support != support:
            if f.n != n:
                raise ResolutionMismatch(
                    f"grid function at N={f.n} combined with N={n} quadrature"
                )
        return f.values
    return f(midpoints(n, support))


def integrate_lebesgue(f, n: int, support: Interval) -> float:
    lo, hi = support
    vals = _operand_values(f, n, support)
    return float(np.sum(vals)) * (hi - lo) / n


def inner_product_hm(u, w, density) -> float:
    """<u, w> against the absolutely continuous invariant probability h m.

    density: an InvariantDensity or the density GridFunction itself.
    Midpoint-rule quadrature at the density's resolution.
    """
    h = density.h if hasattr(density, "h") else density
    lo, hi = h.support
    uu = _operand_values(u, h.n, h.support)
    ww = _operand_values(w, h.n, h.support)
    return float(np.sum(uu * ww * h.values)) * (hi - lo) / h.n


def mean_hm(u, density) -> float:
    h = density.h if hasattr(density, "h") else density
    return inner_product_hm(u, np.ones(h.n), density)


def norm_l1_hm(u, density) -> float:
    h = density.h if hasattr(density, "h") else density
    lo, hi = h.support
    uu = _operand_values(u, h.n, h.support)
    return float(np.sum(np.abs(uu) * h.values)) * (hi - lo) / h.n


def normalize_mean(u: Observable, density) -> Observable:
    """u minus its hm-mean; the result integrates to ~0 against h m."""
    m = mean_hm(u, density)
    if isinstance(u, FourierSum):
        return u + (-m)
    if isinstance(u, GridFunction):
        return GridFunction(u.values - m, u.support)
    return u - m
