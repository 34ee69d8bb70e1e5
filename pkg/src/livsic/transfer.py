"""Transfer-operator numerics: Ulam discretization, invariant density,
pointwise pushforward / normalized operator / composition operator, and
an empirical spectral-decay estimate.

Two discretizations coexist on purpose.  The Ulam matrix is a finite-rank
operator used for the fixed-point problem; the pointwise branch sum with
exact inverse branches carries no projection error in the operator itself
and is used for all operator identities.  For the mod-1 and tent maps the
operators additionally act exactly on trigonometric sums, and that route
is used whenever the input permits it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateDensity, NoConvergence, NoDecay
from .maps import PiecewiseMap
from .observables import (Composed, FourierSum, GridFunction, Observable,
                          StepFunction, midpoints, norm_l1_hm, normalize_mean)

H_FLOOR = 1e-8


@dataclass
class UlamMatrix:
    """Cell-to-cell transition mass: entry (k, j) is the fraction of cell j
    that lands in cell k.  Columns sum to 1; the matrix acts on density
    values by plain multiplication on a uniform grid."""

    n: int
    matrix: sp.csr_matrix
    support: tuple[float, float]
    map_kind: str

    def apply(self, dens: np.ndarray) -> np.ndarray:
        return self.matrix @ dens


@dataclass
class InvariantDensity:
    h: GridFunction
    a: float          # observed lower bound on the core
    b: float          # observed upper bound
    residual: float   # L1(m) fixed-point residual of the Ulam operator
    iterations: int
    ulam: UlamMatrix | None = None

    @property
    def support(self):
        return self.h.support

    @property
    def n(self):
        return self.h.n


def uniform_density(pmap_or_support, n: int) -> InvariantDensity:
    """Lebesgue as an InvariantDensity (exact for the mod-1 and tent maps)."""
    sup = pmap_or_support.core if isinstance(pmap_or_support, PiecewiseMap) \
        else tuple(pmap_or_support)
    width = sup[1] - sup[0]
    h = GridFunction(np.full(n, 1.0 / width), sup)
    return InvariantDensity(h, 1.0 / width, 1.0 / width, 0.0, 0)


# ---------------------------------------------------------------------------
# Ulam discretization


def _branch_preimage_edges(br, edges: np.ndarray) -> np.ndarray:
    """Preimages (under one branch) of grid edges clipped to the branch image."""
    lo, hi = br.image
    y = np.clip(edges, lo, hi)
    if br.is_affine:
        x = br.inverse(y)
    else:
        x = br.inverse(y)  # bisection, <= 1e-13 endpoint error
    return x


def ulam_matrix(pmap: PiecewiseMap, n: int) -> UlamMatrix:
    """Assemble the N-cell Ulam matrix on the core interval.

    Entries are exact interval-intersection lengths for affine branches;
    non-affine branches get preimage endpoints from monotone bisection.
    """
    if n < 2:
        raise ValueError("Ulam grid needs at least two cells")
    lo, hi = pmap.core
    width = hi - lo
    dx = width / n
    edges = lo + np.arange(n + 1) * dx
    rows, cols, vals = [], [], []
    for br in pmap.branches:
        blo, bhi = max(br.lo, lo), min(br.hi, hi)
        if bhi <= blo:
            continue
        x_at_edges = _branch_preimage_edges(br, edges)
        # x_at_edges[k] .. x_at_edges[k+1] is the branch preimage of cell k
        x0 = np.minimum(x_at_edges[:-1], x_at_edges[1:])
        x1 = np.maximum(x_at_edges[:-1], x_at_edges[1:])
        x0 = np.clip(x0, blo, bhi)
        x1 = np.clip(x1, blo, bhi)
        keep = np.nonzero(x1 - x0 > 0)[0]
        for k in keep:
            a, b = x0[k], x1[k]
            j_lo = int(np.floor((a - lo) / dx))
            j_hi = min(int(np.floor((b - lo) / dx - 1e-15)), n - 1)
            for j in range(max(j_lo, 0), j_hi + 1):
                cell_a = lo + j * dx
                overlap = min(b, cell_a + dx) - max(a, cell_a)
                if overlap > 0:
                    rows.append(k)
                    cols.append(j)
                    vals.append(overlap / dx)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return UlamMatrix(n, mat, (lo, hi), pmap.kind)


def invariant_density(ulam: UlamMatrix, tol: float = 1e-12,
                      max_iter: int = 5000) -> InvariantDensity:
    """Power iteration from the uniform density, renormalized each step.

    Stops when the L1(m) step difference falls below tol; raises
    NoConvergence (with the last residual) otherwise.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    lo, hi = ulam.support
    dx = (hi - lo) / ulam.n
    h = np.full(ulam.n, 1.0 / (hi - lo))
    step = np.inf
    for it in range(1, max_iter + 1):
        nh = ulam.apply(h)
        nh /= np.sum(nh) * dx
        step = float(np.sum(np.abs(nh - h)) * dx)
        h = nh
        if step < tol:
            residual = float(np.sum(np.abs(ulam.apply(h) - h)) * dx)
            return InvariantDensity(GridFunction(h, ulam.support),
                                    float(np.min(h)), float(np.max(h)),
                                    residual, it, ulam)
    raise NoConvergence(
        f"power iteration still moving by {step:.3e} after {max_iter} steps",
        residual=step)


def compute_invariant_density(pmap: PiecewiseMap, n: int, tol: float = 1e-12,
                              max_iter: int = 5000) -> InvariantDensity:
    """Convenience: exact Lebesgue for the mod-1/tent maps, Ulam otherwise."""
    if pmap.lebesgue_invariant:
        dens = uniform_density(pmap, n)
        dens.ulam = ulam_matrix(pmap, n)
        return dens
    return invariant_density(ulam_matrix(pmap, n), tol, max_iter)


# ---------------------------------------------------------------------------
# pointwise operators


def perron_frobenius_apply(pmap: PiecewiseMap, f, n: int | None = None) -> GridFunction:
    """Pushforward of f by the branch sum, evaluated at grid midpoints.

    f: Observable (grid functions evaluate as step functions, analytic
    observables exactly).  The indicator of each branch image is honored
    through the recorded image intervals.
    """
    if isinstance(f, np.ndarray):
        f = GridFunction(f, pmap.core)
    if n is None:
        n = f.n if isinstance(f, GridFunction) else 4096
    xs = midpoints(n, pmap.core)
    out = np.zeros(n)
    clo, chi = pmap.core
    for br in pmap.branches:
        mask = br.image_mask(xs)
        if not np.any(mask):
            continue
        x_pre = br.inverse(xs[mask])
        inside = (x_pre >= clo) & (x_pre <= chi)
        if not np.any(inside):
            continue
        sub = np.zeros(mask.sum())
        sub[inside] = f(x_pre[inside]) / np.abs(br.derivative(x_pre[inside]))
        out[mask] += sub
    return GridFunction(out, pmap.core)


def normalized_transfer_apply(pmap: PiecewiseMap, density: InvariantDensity, u,
                              floor: float = H_FLOOR) -> GridFunction:
    """The h-normalized operator: pushforward of u h, divided by h."""
    h = density.h
    if isinstance(u, np.ndarray):
        u = GridFunction(u, h.support)
    n = h.n
    xs = h.midpoints()
    hx = h.values
    if np.min(hx) < floor:
        raise DegenerateDensity(
            f"density falls to {np.min(hx):.3e} on the core; check the configuration")
    out = np.zeros(n)
    clo, chi = h.support
    for br in pmap.branches:
        mask = br.image_mask(xs)
        if not np.any(mask):
            continue
        x_pre = br.inverse(xs[mask])
        inside = (x_pre >= clo) & (x_pre <= chi)
        sub = np.zeros(mask.sum())
        if np.any(inside):
            xp = x_pre[inside]
            sub[inside] = u(xp) * h(xp) / np.abs(br.derivative(xp))
        out[mask] += sub
    return GridFunction(out / hx, h.support)


def koopman_apply(pmap: PiecewiseMap, w: Observable) -> Observable:
    """w composed with the map; exact trig arithmetic where available.

    Sampled w stays a lazy composition (its value at a grid midpoint x is
    the nearest-midpoint read of w at T(x); keeping it lazy preserves the
    adjoint identities at full precision).
    """
    if isinstance(w, FourierSum):
        sym = symbolic_koopman(pmap, w)
        if sym is not None:
            return sym
    return Composed(w, pmap.apply, pmap.core)


# ---------------------------------------------------------------------------
# exact trig-sum action of the operators (mod-1 and tent maps)


def symbolic_koopman(pmap: PiecewiseMap, w: FourierSum) -> FourierSum | None:
    """Frequency action of composition with T on a trig sum, or None.

    mod-1 maps multiply integer frequencies by the slope; the tent map
    doubles frequencies of pure cosine terms (half-integer frequencies
    included).  Anything outside those families returns None.
    """
    if pmap.symbolic == "ladic":
        ell = pmap.params["ell"]
        out = FourierSum(support=w.support)
        for nu, (a, b) in w.terms.items():
            if nu == 0:
                out._accumulate(nu, a, b)
                continue
            if nu.denominator != 1:
                return None
            out._accumulate(nu * ell, a, b)
        return out
    if pmap.symbolic == "tent":
        out = FourierSum(support=w.support)
        for nu, (a, b) in w.terms.items():
            if nu == 0:
                out._accumulate(nu, a, b)
                continue
            if b != 0.0 or (2 * nu).denominator != 1:
                return None
            out._accumulate(2 * nu, a, 0.0)
        return out
    return None


def symbolic_transfer(pmap: PiecewiseMap, u: FourierSum) -> FourierSum | None:
    """Exact action of the normalized transfer operator on a trig sum.

    Valid for maps preserving Lebesgue measure.  mod-1 slope ell: keeps
    multiples of ell and divides the frequency; the tent map halves
    integer cosine frequencies and kills half-integer ones.
    """
    if not pmap.lebesgue_invariant:
        return None
    if pmap.symbolic == "ladic":
        ell = pmap.params["ell"]
        out = FourierSum(support=u.support)
        for nu, (a, b) in u.terms.items():
            if nu == 0:
                out._accumulate(nu, a, b)
            elif nu.denominator == 1 and nu % ell == 0:
                out._accumulate(nu / ell, a, b)
        return out
    if pmap.symbolic == "tent":
        out = FourierSum(support=u.support)
        for nu, (a, b) in u.terms.items():
            if nu == 0:
                out._accumulate(nu, a, b)
                continue
            if b != 0.0 or (2 * nu).denominator != 1:
                return None
            if nu.denominator == 1:
                out._accumulate(nu / 2, a, 0.0)
            # half-integer cosine frequencies are annihilated
        return out
    return None


def transfer_step(pmap: PiecewiseMap, density: InvariantDensity, u):
    """One application of the normalized operator, symbolic when possible."""
    if isinstance(u, FourierSum):
        sym = symbolic_transfer(pmap, u)
        if sym is not None:
            return sym
    return normalized_transfer_apply(pmap, density, u)


# ---------------------------------------------------------------------------
# empirical spectral decay


def lacunary_test_function(rng, ell: int, depth: int,
                           support=(0.0, 1.0)) -> FourierSum:
    """Random trig sum over frequencies ell^k with coefficients ~ ell^-k.

    Under the normalized operator its norm decays geometrically at rate
    1/ell, which is what the decay estimator is meant to recover.
    """
    modes = []
    for k in range(depth):
        amp = ell ** (-float(k)) * rng.uniform(0.8, 1.2)
        if rng.uniform() < 0.5:
            modes.append((Fraction(ell) ** k, amp, 0.0))
        else:
            modes.append((Fraction(ell) ** k, 0.0, amp))
    return FourierSum.from_modes(modes, support)


def random_step_test_function(rng, support=(0.0, 1.0), n_jumps: int = 24):
    lo, hi = support
    breaks = np.sort(rng.uniform(lo, hi, size=n_jumps))
    vals = np.cumsum(rng.uniform(-1, 1, size=n_jumps + 1) * (2.0 / n_jumps))
    return StepFunction(breaks, vals, support)


def _trig_l1_lebesgue(f: FourierSum, support, floor_n: int) -> float:
    """L1(m) norm of a trig sum on a grid fine enough for its top frequency."""
    lo, hi = support
    top = max((float(nu) for nu in f.terms), default=0.0)
    n = floor_n
    while n < 8 * top and n < 2 ** 21:
        n *= 2
    xs = midpoints(n, support)
    return float(np.mean(np.abs(f(xs)))) * (hi - lo)


def spectral_decay(pmap: PiecewiseMap, density: InvariantDensity,
                   trials: int = 8, n_max: int = 8, seed: int = 0) -> float:
    """Median fitted geometric decay rate of ||P^n u||_{L1(hm)}.

    Test functions are mean-zero; the fit uses the least-squares slope of
    the log norms over the final half of the steps (transient discarded).
    For mod-1 maps the iterates are exact trig sums and each norm is
    evaluated on a grid fine enough for its top frequency, so the rate is
    free of aliasing.  Raises NoDecay when some trial's norms fail to
    drop below 0.99 of the initial norm by n_max.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    rates = []
    for _ in range(trials):
        if pmap.symbolic == "ladic":
            ell = pmap.params["ell"]
            depth = min(n_max + 4, int(np.log(2.0 ** 19) / np.log(ell)))
            u = lacunary_test_function(rng, ell, depth=depth, support=pmap.core)
            u = u + (-u.constant_part())
            norm0 = _trig_l1_lebesgue(u, pmap.core, density.n)
        else:
            u = normalize_mean(random_step_test_function(rng, pmap.core), density)
            norm0 = norm_l1_hm(u.to_grid(density.n, density.support).values, density)
        if norm0 < 1e-12:
            continue  # constant input: mean-zero projection left nothing
        steps = min(n_max, depth - 1) if pmap.symbolic == "ladic" else n_max
        cur = u
        norms = []
        for _ in range(steps):
            cur = transfer_step(pmap, density, cur)
            if isinstance(cur, FourierSum):
                norms.append(_trig_l1_lebesgue(cur, pmap.core, density.n))
            else:
                vals = cur.values if isinstance(cur, GridFunction) \
                    else cur.to_grid(density.n, density.support).values
                norms.append(norm_l1_hm(vals, density))
        norms = np.array(norms)
        if norms[-1] > 0.99 * norm0:
            raise NoDecay(
                f"L1 norm only fell from {norm0:.3e} to {norms[-1]:.3e} in {steps} steps")
        tail = np.maximum(norms[max(steps // 2 - 1, 0):], 1e-300)
        ks = np.arange(len(tail))
        slope = np.polyfit(ks, np.log(tail), 1)[0]
        rates.append(float(np.exp(slope)))
    if not rates:
        raise NoDecay("all trials degenerated to the zero function")
    return float(np.clip(np.median(rates), 0.0, 1.0))
