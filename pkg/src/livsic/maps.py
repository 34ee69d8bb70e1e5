"""Piecewise monotone expanding interval maps with explicit branch data.

Branch domains are half-open [l, r) with the rightmost branch closed;
points landing exactly on an interior endpoint belong to the branch on
the right.  Inverse branches are closed-form for affine pieces and
monotone bisection (to 1e-13) otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParams, NotAHorseshoe

Interval = tuple[float, float]

_BISECT_TOL = 1e-13


def _bisect_inverse(forward, lo: float, hi: float, increasing: bool):
    """Vectorized monotone bisection for y -> x with forward(x) = y."""

    def inverse(y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        a = np.full(y.shape, lo)
        b = np.full(y.shape, hi)
        while np.max(b - a) > _BISECT_TOL:
            m = 0.5 * (a + b)
            fm = forward(m)
            go_right = (fm < y) if increasing else (fm > y)
            a = np.where(go_right, m, a)
            b = np.where(go_right, b, m)
        return 0.5 * (a + b)

    return inverse


@dataclass
class Branch:
    """One monotone piece of the map."""

    lo: float
    hi: float
    forward: callable
    inverse: callable
    derivative: callable
    increasing: bool
    image: Interval  # (min, max) of the branch image
    is_affine: bool = False
    slope: float | None = None

    @classmethod
    def affine(cls, lo: float, hi: float, y_at_lo: float, y_at_hi: float) -> "Branch":
        s = (y_at_hi - y_at_lo) / (hi - lo)
        c = y_at_lo - s * lo
        if s == 0:
            raise InvalidParams("affine branch with zero slope")
        fwd = lambda x: s * np.asarray(x, dtype=float) + c
        inv = lambda y: (np.asarray(y, dtype=float) - c) / s
        der = lambda x: np.full(np.shape(np.atleast_1d(x)), s)
        img = (min(y_at_lo, y_at_hi), max(y_at_lo, y_at_hi))
        return cls(lo, hi, fwd, inv, der, s > 0, img, is_affine=True, slope=s)

    @property
    def min_abs_derivative(self) -> float:
        xs = np.linspace(self.lo, self.hi, 257)[1:-1]
        return float(np.min(np.abs(self.derivative(xs))))

    def contains(self, x, last: bool = False) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        upper = (x <= self.hi) if last else (x < self.hi)
        return (x >= self.lo) & upper

    def image_mask(self, y) -> np.ndarray:
        """Indicator of the branch image, half-open on the endpoint side."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        lo, hi = self.image
        if self.increasing:
            return (y >= lo) & (y < hi)
        return (y > lo) & (y <= hi)


@dataclass
class HorseshoeWitness:
    J: Interval
    J1: Interval
    J2: Interval
    branch_ids: tuple[int, int]
    covering_k: int = 1  # D2 covering data instantiated for the witness
    covering_j: int = 0


@dataclass
class TransitionMatrix:
    entries: np.ndarray  # m x m 0/1
    primitivity_power: int | None

    def is_primitive(self) -> bool:
        return self.primitivity_power is not None


@dataclass
class PiecewiseMap:
    interval: Interval
    branches: list[Branch]
    core: Interval
    expansion: float
    kind: str
    params: dict = field(default_factory=dict)
    symbolic: str | None = None  # "ladic" / "tent": exact trig-sum operator action
    lebesgue_invariant: bool = False
    horseshoe: HorseshoeWitness | None = None

    @property
    def a_lefts(self) -> np.ndarray:
        return np.array([b.lo for b in self.branches])

    def branch_index(self, x) -> np.ndarray:
        idx = np.searchsorted(self.a_lefts, np.atleast_1d(np.asarray(x, dtype=float)),
                              side="right") - 1
        return np.clip(idx, 0, len(self.branches) - 1)

    def apply(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = self.branch_index(x)
        out = np.empty_like(x)
        for j, br in enumerate(self.branches):
            m = idx == j
            if np.any(m):
                out[m] = br.forward(x[m])
        return out

    __call__ = apply

    def apply_n(self, x, n: int) -> np.ndarray:
        y = np.atleast_1d(np.asarray(x, dtype=float))
        for _ in range(n):
            y = self.apply(y)
        return y

    def derivative_at(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = self.branch_index(x)
        out = np.empty_like(x)
        for j, br in enumerate(self.branches):
            m = idx == j
            if np.any(m):
                out[m] = br.derivative(x[m])
        return out


def orbit(pmap: PiecewiseMap, x: float, n: int) -> list[float]:
    """[x, Tx, ..., T^n x]; endpoint points go to the left-closed branch."""
    pts = [float(x)]
    for _ in range(n):
        pts.append(float(pmap.apply(pts[-1])[0]))
    return pts


# ---------------------------------------------------------------------------
# builders


def _validate(pmap: PiecewiseMap) -> PiecewiseMap:
    lo, hi = pmap.interval
    left = lo
    for br in pmap.branches:
        if abs(br.lo - left) > 1e-12 * max(1.0, hi - lo):
            raise InvalidParams(
                f"branch domains leave a gap/overlap at {left} vs {br.lo}")
        if br.hi <= br.lo:
            raise InvalidParams("empty branch domain")
        left = br.hi
    if abs(left - hi) > 1e-12 * max(1.0, hi - lo):
        raise InvalidParams("branch domains do not cover the interval")
    if pmap.expansion <= 1.0 and pmap.kind != "custom":
        raise InvalidParams(
            f"{pmap.kind} map must be expanding; got min |T'| = {pmap.expansion}")
    return pmap


def build_map(kind: str, **params) -> PiecewiseMap:
    """Construct a built-in map kind.

    kinds: doubling (ell), tent, beta (beta), linear (pieces), unimodal
    (peak, shear).
    """
    if kind == "doubling":
        ell = int(params.get("ell", 2))
        if ell < 2:
            raise InvalidParams(f"doubling map needs an integer slope >= 2, got {ell}")
        branches = [Branch.affine(i / ell, (i + 1) / ell, 0.0, 1.0) for i in range(ell)]
        return _validate(PiecewiseMap((0.0, 1.0), branches, (0.0, 1.0), float(ell),
                                      "doubling", {"ell": ell},
                                      symbolic="ladic", lebesgue_invariant=True))

    if kind == "tent":
        branches = [Branch.affine(0.0, 0.5, 0.0, 1.0), Branch.affine(0.5, 1.0, 1.0, 0.0)]
        return _validate(PiecewiseMap((0.0, 1.0), branches, (0.0, 1.0), 2.0, "tent",
                                      {}, symbolic="tent", lebesgue_invariant=True))

    if kind == "beta":
        beta = float(params["beta"])
        if beta <= 1.0:
            raise InvalidParams(f"beta transformation needs beta > 1, got {beta}")
        nfull = int(np.floor(beta)) if beta != np.floor(beta) else int(beta) - 1
        branches = [Branch.affine(i / beta, (i + 1) / beta, 0.0, 1.0)
                    for i in range(nfull)]
        # final (possibly partial) branch: image [0, beta - floor(beta)) or [0,1)
        last_lo = nfull / beta
        branches.append(Branch.affine(last_lo, 1.0, 0.0, beta - nfull))
        return _validate(PiecewiseMap((0.0, 1.0), branches, (0.0, 1.0), beta, "beta",
                                      {"beta": beta}))

    if kind == "linear":
        pieces = params["pieces"]
        branches = []
        for pc in pieces:
            (l, r), (a, b) = pc["domain"], pc["image"]
            branches.append(Branch.affine(float(l), float(r), float(a), float(b)))
        branches.sort(key=lambda br: br.lo)
        interval = (branches[0].lo, branches[-1].hi)
        expansion = min(abs(br.slope) for br in branches)
        if expansion <= 1.0:
            raise InvalidParams(f"linear table has a piece with |slope| = {expansion} <= 1")
        core = tuple(params.get("core", interval))
        return _validate(PiecewiseMap(interval, branches, core, expansion, "linear",
                                      {"pieces": pieces}))

    if kind == "unimodal":
        return _build_unimodal(float(params.get("peak", 0.9)),
                               float(params.get("shear", 0.2)))

    raise InvalidParams(f"unknown map kind {kind!r}")


def _build_unimodal(peak: float, shear: float) -> PiecewiseMap:
    """Symmetric unimodal map on [-1, 1]: T(-1) = T(1) = -1, T(0) = peak.

    Each half is T(x) = peak - (peak+1) * psi(|x|) with
    psi(t) = t (1 + shear (1 - t)), so min |T'| = (peak+1)(1-shear).
    """
    if not (0.0 <= shear < 0.5):
        raise InvalidParams(f"shear must lie in [0, 0.5), got {shear}")
    if not (-1.0 < peak <= 1.0):
        raise InvalidParams(f"peak must lie in (-1, 1], got {peak}")
    theta = (peak + 1.0) * (1.0 - shear)
    if theta <= 1.0:
        raise InvalidParams(f"unimodal map not expanding: min |T'| = {theta}")

    def psi(t):
        return t * (1.0 + shear * (1.0 - t))

    def left_fwd(x):
        return peak - (peak + 1.0) * psi(-np.asarray(x, dtype=float))

    def right_fwd(x):
        return peak - (peak + 1.0) * psi(np.asarray(x, dtype=float))

    def left_der(x):
        return (peak + 1.0) * (1.0 + shear - 2.0 * shear * (-np.asarray(x, dtype=float)))

    def right_der(x):
        return -(peak + 1.0) * (1.0 + shear - 2.0 * shear * np.asarray(x, dtype=float))

    left = Branch(-1.0, 0.0, left_fwd, _bisect_inverse(left_fwd, -1.0, 0.0, True),
                  left_der, True, (-1.0, peak))
    right = Branch(0.0, 1.0, right_fwd, _bisect_inverse(right_fwd, 0.0, 1.0, False),
                   right_der, False, (-1.0, peak))
    pmap = PiecewiseMap((-1.0, 1.0), [left, right], (-1.0, 1.0), theta, "unimodal",
                        {"peak": peak, "shear": shear, "theta": theta})
    # invariant sub-interval of the second iterate: [T^2(0), T(0)]
    t0 = float(left_fwd(0.0))
    t20 = float(pmap.apply(t0)[0])
    pmap.core = (t20, t0)
    return pmap


def compose_with_self(pmap: PiecewiseMap) -> PiecewiseMap:
    """The second iterate as a PiecewiseMap (branch-by-branch composition)."""
    cuts = sorted({br.lo for br in pmap.branches} | {pmap.branches[-1].hi})
    inner_cuts = np.array(cuts[1:-1])
    new_branches = []
    for br in pmap.branches:
        # split br's domain at preimages of the branch endpoints of T
        pts = [br.lo, br.hi]
        lo_img, hi_img = br.image
        for c in inner_cuts:
            if lo_img < c < hi_img:
                pts.append(float(br.inverse(np.array([c]))[0]))
        pts = sorted(pts)
        for l, r in zip(pts[:-1], pts[1:]):
            if r - l < 1e-14:
                continue
            mid = 0.5 * (l + r)
            j2 = int(pmap.branch_index(pmap.apply(mid))[0])
            br2 = pmap.branches[j2]

            def fwd(x, b1=br, b2=br2):
                return b2.forward(b1.forward(x))

            def inv(y, b1=br, b2=br2):
                return b1.inverse(b2.inverse(y))

            def der(x, b1=br, b2=br2):
                return b1.derivative(x) * b2.derivative(b1.forward(x))

            ya, yb = float(fwd(np.array([l]))[0]), float(fwd(np.array([r]))[0])
            increasing = yb > ya
            new_branches.append(Branch(l, r, fwd, inv, der, increasing,
                                       (min(ya, yb), max(ya, yb))))
    exp2 = min(br.min_abs_derivative for br in new_branches)
    return PiecewiseMap(pmap.interval, new_branches, pmap.core, exp2,
                        pmap.kind + "^2", dict(pmap.params))


def unimodal_fixed_point(pmap: PiecewiseMap) -> float:
    """The unique fixed point of a built-in unimodal map in (0, 1]."""
    if not pmap.kind.startswith("unimodal"):
        raise InvalidParams("fixed-point helper only applies to unimodal maps")
    f = lambda x: pmap.apply(x) - x
    a, b = 1e-9, 1.0
    for _ in range(200):
        m = 0.5 * (a + b)
        if f(np.array([a]))[0] * f(np.array([m]))[0] <= 0:
            b = m
        else:
            a = m
    return 0.5 * (a + b)


def unimodal_horseshoe_candidate(pmap: PiecewiseMap):
    """Witness intervals (J, J1, J2) for the second iterate of a unimodal map."""
    p = unimodal_fixed_point(pmap)
    right = pmap.branches[1]
    y_star = float(right.inverse(np.array([-p]))[0])   # T(y*) = -p
    z = float(right.inverse(np.array([y_star]))[0])    # T(z) = y*
    return (-p, p), (-p, -z), (z, p)


# ---------------------------------------------------------------------------
# structural checks


def transition_matrix(pmap: PiecewiseMap, tol: float = 1e-12) -> TransitionMatrix:
    """0/1 reachability matrix: a_ij = 1 when the open image of branch i
    overlaps the open domain of branch j (endpoint comparison).

    For Markov maps, whose branch images are unions of pieces, overlap and
    covering coincide.  Primitivity power: smallest k <= m^2 with A^k
    everywhere positive, or None.
    """
    m = len(pmap.branches)
    a = np.zeros((m, m), dtype=int)
    for i, bi in enumerate(pmap.branches):
        img_lo, img_hi = bi.image
        for j, bj in enumerate(pmap.branches):
            if max(img_lo, bj.lo) < min(img_hi, bj.hi) - tol:
                a[i, j] = 1
    power = None
    acc = np.eye(m, dtype=int)
    for k in range(1, m * m + 1):
        acc = (acc @ a > 0).astype(int)
        if np.all(acc > 0):
            power = k
            break
    return TransitionMatrix(a, power)


def find_horseshoe(pmap: PiecewiseMap, J: Interval, J1: Interval, J2: Interval,
                   tol: float = 1e-9) -> HorseshoeWitness:
    """Verify the supplied horseshoe candidate; the tool does not search.

    On success the witness is attached to the map (set-once) so the
    variation-growth checks can use it.
    """
    (jl, jr), (l1, r1), (l2, r2) = J, J1, J2
    if not (jl < jr and l1 < r1 and l2 < r2):
        raise NotAHorseshoe("degenerate candidate interval")
    if not (min(r1, r2) <= max(l1, l2) + tol):
        raise NotAHorseshoe("J1 and J2 overlap")
    ids = []
    for name, (l, r) in (("J1", (l1, r1)), ("J2", (l2, r2))):
        if l < jl - tol or r > jr + tol:
            raise NotAHorseshoe(f"{name} is not contained in J")
        bi = int(pmap.branch_index(np.array([0.5 * (l + r)]))[0])
        br = pmap.branches[bi]
        if l < br.lo - tol or r > br.hi + tol:
            raise NotAHorseshoe(f"{name} is not inside a single branch domain")
        ya, yb = float(br.forward(np.array([l]))[0]), float(br.forward(np.array([r]))[0])
        img = (min(ya, yb), max(ya, yb))
        if img[0] > jl + tol or img[1] < jr - tol:
            raise NotAHorseshoe(
                f"image of {name} = ({img[0]:.6g}, {img[1]:.6g}) does not cover J")
        ids.append(bi)
    witness = HorseshoeWitness(J, J1, J2, (ids[0], ids[1]))
    if pmap.horseshoe is None:
        pmap.horseshoe = witness
    return witness
