"""Kernel basis of the normalized transfer operator and the coefficient
calculus built on it.

Two constructions: the classical trig basis for mod-1 maps (frequencies
not divisible by the slope), and the general family of two-interval
kernel functions (a matched pair of subintervals in different branches
with equal images) orthonormalized by Gram-Schmidt in the hm inner
product.  Coefficients c[i][j] pair an observable with basis element i
composed with the j-th iterate of the map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EmptyFamily
from .maps import PiecewiseMap
from .observables import (FourierSum, GridFunction, Observable, LinComb,
                          inner_product_hm, midpoints)
from .transfer import InvariantDensity, perron_frobenius_apply


@dataclass
class BasisElement:
    """One kernel-basis function, possibly composed with map iterates."""

    phi: Observable
    ident: str
    level: int = 0
    norm_check: float = 1.0


class KernelPairFunction(Observable):
    """Two-interval kernel element of the normalized operator.

    Takes the value 1 on a closed interval I2 (inside one branch), a
    derivative/density ratio on I1 = sigma_1(T(I2)) (inside another
    branch), and 0 elsewhere; the two branch contributions then cancel
    exactly under the pushforward of (phi * h).
    """

    def __init__(self, pmap: PiecewiseMap, density: InvariantDensity,
                 i1: int, i2: int, interval2: tuple[float, float],
                 dyadic: tuple[int, int, int]):
        self.pmap = pmap
        self.density = density
        self.i1, self.i2 = i1, i2
        self.support = density.h.support
        self.dyadic = dyadic  # (numerator_lo, numerator_hi, denominator)
        b1, b2 = pmap.branches[i1], pmap.branches[i2]
        lo2, hi2 = interval2
        ya, yb = float(b2.forward(np.array([lo2]))[0]), float(b2.forward(np.array([hi2]))[0])
        self.image = (min(ya, yb), max(ya, yb))
        xa = float(b1.inverse(np.array([self.image[0]]))[0])
        xb = float(b1.inverse(np.array([self.image[1]]))[0])
        self.interval1 = (min(xa, xb), max(xa, xb))
        self.interval2 = (lo2, hi2)

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape)
        (l1, r1), (l2, r2) = self.interval1, self.interval2
        in2 = (x >= l2) & (x <= r2)
        out[in2] = 1.0
        in1 = (x >= l1) & (x <= r1)
        if np.any(in1):
            xs = x[in1]
            b2 = self.pmap.branches[self.i2]
            tx = self.pmap.branches[self.i1].forward(xs)
            s2x = b2.inverse(tx)
            h = self.density.h
            ratio = (np.abs(self.pmap.branches[self.i1].derivative(xs))
                     / np.abs(b2.derivative(s2x))) * (h(s2x) / h(xs))
            out[in1] = -ratio
        return out

    def jump_points(self) -> np.ndarray:
        return np.array(sorted(set(self.interval1) | set(self.interval2)))


def fourier_kernel_basis(ell: int, n_max: int,
                         support=(0.0, 1.0)) -> list[BasisElement]:
    """Normalized trig modes sqrt(2) cos/sin(2 pi n x) with ell not dividing n.

    These span the kernel of the normalized operator for the mod-1 map of
    slope ell; ordering is by frequency, cosine before sine.
    """
    out = []
    r2 = np.sqrt(2.0)
    for n in range(1, n_max + 1):
        if n % ell == 0:
            continue
        out.append(BasisElement(
            FourierSum({Fraction(n): (r2, 0.0)}, support), f"cos{n}"))
        out.append(BasisElement(
            FourierSum({Fraction(n): (0.0, r2)}, support), f"sin{n}"))
    return out


def kernel_family(pmap: PiecewiseMap, density: InvariantDensity,
                  budget: int, max_depth: int = 8,
                  kernel_tol: float = 1e-8) -> list[KernelPairFunction]:
    """Enumerate two-interval kernel functions up to `budget`.

    Candidate intervals I2 run over dyadic subintervals of the core (by
    increasing depth, then left to right, then by branch pair); I2 must
    sit inside one branch and its image inside the image of a different
    branch.  Every emitted function is checked to be annihilated by the
    pushforward on the grid.
    """
    lo, hi = density.h.support
    width = hi - lo
    out: list[KernelPairFunction] = []
    nb = len(pmap.branches)
    for depth in range(1, max_depth + 1):
        denom = 2 ** depth
        step = width / denom
        for k in range(denom):
            l2, r2 = lo + k * step, lo + (k + 1) * step
            for i2 in range(nb):
                b2 = pmap.branches[i2]
                if not (b2.lo <= l2 and r2 <= b2.hi + 1e-12):
                    continue
                ya, yb = float(b2.forward(np.array([l2]))[0]), float(b2.forward(np.array([r2]))[0])
                img = (min(ya, yb), max(ya, yb))
                for i1 in range(nb):
                    if i1 == i2:
                        continue
                    b1 = pmap.branches[i1]
                    if not (b1.image[0] <= img[0] + 1e-12 and img[1] <= b1.image[1] + 1e-12):
                        continue
                    phi = KernelPairFunction(pmap, density, i1, i2, (l2, r2),
                                             (k, k + 1, denom))
                    push = perron_frobenius_apply(
                        pmap, lambda x, p=phi, h=density.h: p(x) * h(x),
                        n=density.n)
                    resid = float(np.sum(np.abs(push.values))) * width / density.n
                    if resid < kernel_tol:
                        out.append(phi)
                        if len(out) >= budget:
                            return out
    if not out:
        raise EmptyFamily(
            f"no admissible interval pair up to dyadic depth {max_depth}; "
            "branch images may be disjoint")
    return out


def gram_schmidt(family, density: InvariantDensity,
                 drop_tol: float = 1e-10) -> list[BasisElement]:
    """Orthonormalize the family in the hm inner product.

    Vectors whose post-projection norm falls below drop_tol are dropped.
    Returned elements evaluate as exact linear combinations of the input
    functions (not as grid re-samples), so kernel membership survives.
    """
    kept_obs: list[Observable] = []
    kept_vecs: list[np.ndarray] = []
    out: list[BasisElement] = []
    h = density.h
    xs = h.midpoints()
    for idx, phi in enumerate(family):
        vec = phi(xs)
        coeffs = [1.0]
        parts = [phi]
        for q_obs, q_vec, q_el in zip(kept_obs, kept_vecs, out):
            proj = inner_product_hm(vec, q_vec, density)
            if proj != 0.0:
                vec = vec - proj * q_vec
                # subtract the same combination symbolically
                coeffs = coeffs + [-proj * c for c in q_el._coeffs]
                parts = parts + list(q_el._parts)
        nrm = np.sqrt(max(inner_product_hm(vec, vec, density), 0.0))
        if nrm < drop_tol:
            continue
        coeffs = [c / nrm for c in coeffs]
        obs = LinComb(coeffs, parts, h.support)
        el = BasisElement(obs, f"gs{len(out)}", 0,
                          norm_check=inner_product_hm(vec / nrm, vec / nrm, density))
        el._coeffs = coeffs
        el._parts = parts
        out.append(el)
        kept_obs.append(obs)
        kept_vecs.append(vec / nrm)
    return out


# ---------------------------------------------------------------------------
# coefficient calculus


@dataclass
class CoefficientTable:
    ids: list[str]
    levels: int              # columns are j = 0 .. levels
    entries: np.ndarray      # shape (len(ids), levels + 1)
    u_id: str = ""
    quadrature_n: int = 0

    def entry(self, ident: str, j: int) -> float:
        return float(self.entries[self.ids.index(ident), j])


def coefficient_table(u, basis: list[BasisElement], pmap: PiecewiseMap,
                      density: InvariantDensity, levels: int,
                      u_id: str = "") -> CoefficientTable:
    """c[i][j] = <u, phi_i o T^j>_{hm} by quadrature at the density grid.

    The iterate composition is evaluated through exact orbits of the grid
    midpoints.
    """
    if levels < 0:
        raise ValueError("levels must be >= 0")
    h = density.h
    xs = h.midpoints()
    lo, hi = h.support
    weights = h.values * (hi - lo) / h.n
    uu = u(xs) if isinstance(u, Observable) else np.asarray(u, dtype=float)
    rows = np.empty((len(basis), levels + 1))
    orbit_pts = xs.copy()
    for j in range(levels + 1):
        integrand = uu * weights
        for i, el in enumerate(basis):
            rows[i, j] = float(np.sum(integrand * el.phi(orbit_pts)))
        if j < levels:
            orbit_pts = pmap.apply(orbit_pts)
    return CoefficientTable([el.ident for el in basis], levels, rows,
                            u_id=u_id, quadrature_n=h.n)


def first_obstruction(table: CoefficientTable, threshold: float = 1e-5):
    """First basis id (in table order) with an above-threshold entry and
    its minimal such level, or the string "constant" if every entry is
    below threshold (relative to this truncation)."""
    for i, ident in enumerate(table.ids):
        for j in range(table.levels + 1):
            if abs(table.entries[i, j]) > threshold:
                return ident, j
    return "constant"
