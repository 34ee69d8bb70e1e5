"""Coboundary solver and the finite depth ladder.

The solve accumulates the operator series v = sum_j lambda^(j-1) P^j u
until the weighted tail norm collapses, then renders an honest verdict by
re-evaluating the cohomological difference of the candidate against u:

  Coboundary       residual below eps_res (and the solution is mean zero),
  NotCoboundary    series converged but the limit fails the equation,
  Inconclusive     a rung inherited a solver error (ladder only).

For trig-sum inputs on the mod-1 / tent maps the whole series is exact
coefficient arithmetic; sampled inputs run on the grid and the verdict
then refers to the sampled function itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import (BasisElement, CoefficientTable, coefficient_table,
                    first_obstruction, fourier_kernel_basis)
from .errors import (ConjugacyViolation, InvalidParams, MeanNotZero,
                     MissingWitness, NoConvergence, NoObstruction)
from .maps import PiecewiseMap
from .observables import (Composed, FourierSum, GridFunction, Homeomorphism,
                          LinComb, Observable, mean_hm, midpoints,
                          norm_l1_hm, normalize_mean)
from .pvariation import p_variation
from .transfer import (InvariantDensity, koopman_apply,
                       normalized_transfer_apply, symbolic_transfer)


@dataclass
class SolverConfig:
    eps_tail: float = 1e-10
    eps_res: float = 1e-6
    j_max: int = 200
    max_depth: int = 64
    constant_tol: float = 1e-9
    threshold: float = 1e-5    # obstruction scan threshold
    p: float = 1.0             # variation exponent for traces / bound
    basis_n_max: int = 19      # trig kernel basis frequency cap (mod-1 maps)
    basis_levels: int = 3


@dataclass
class SolveReport:
    verdict: str                       # Coboundary | NotCoboundary | Inconclusive
    residual: float
    terms_used: int
    tail_norm: float
    solution: GridFunction | None = None
    solution_obs: Observable | None = None
    lam: float = 1.0
    note: str = ""


@dataclass
class LadderResult:
    depth: int | None                  # None when u0 is constant
    constant: bool
    chain: list                        # observables u_0 .. u_m
    chain_grids: list                  # same chain sampled on the grid
    rung_reports: list
    variation_trace: list
    sup_trace: list
    bound: float | None = None
    obstruction: tuple | None = None   # (basis id, level)
    caveat: str = ""


def coboundary_apply(pmap: PiecewiseMap, v: Observable, lam: float = 1.0) -> Observable:
    """The cohomological difference v o T - lam v (exact trig sums stay exact)."""
    uv = koopman_apply(pmap, v)
    if isinstance(uv, FourierSum) and isinstance(v, FourierSum):
        return uv + v * (-lam)
    jumps = [v.jump_points(), _pullback_jumps(pmap, v.jump_points())]
    jumps.append(np.array([br.lo for br in pmap.branches[1:]]))
    allj = np.unique(np.concatenate([j for j in jumps if len(j)]) if any(
        len(j) for j in jumps) else np.empty(0))
    out = LinComb([1.0, -lam], [uv, v], pmap.core)
    out.jump_points = lambda: allj
    return out


def _pullback_jumps(pmap: PiecewiseMap, jumps: np.ndarray) -> np.ndarray:
    if not len(jumps):
        return jumps
    pre = []
    for br in pmap.branches:
        lo, hi = br.image
        inside = jumps[(jumps > lo) & (jumps < hi)]
        if len(inside):
            pre.append(br.inverse(inside))
    return np.sort(np.concatenate(pre)) if pre else np.empty(0)


def neumann_solve(pmap: PiecewiseMap, density: InvariantDensity, u,
                  lam: float = 1.0, cfg: SolverConfig | None = None) -> SolveReport:
    """Solve v o T - lam v = u through the operator series.

    At lam = 1 the hm-mean of u must vanish (necessary condition for a
    coboundary); a small drift is projected away, a large one raises
    MeanNotZero.  Raises NoConvergence when the weighted tail fails to
    fall below eps_tail within j_max terms.
    """
    cfg = cfg or SolverConfig()
    if not (0.0 < lam <= 1.0):
        raise InvalidParams(f"twist parameter must lie in (0, 1], got {lam}")
    if isinstance(u, np.ndarray):
        u = GridFunction(u, density.h.support)

    if lam == 1.0:
        mean = mean_hm(u, density)
        if isinstance(u, FourierSum):
            gate = cfg.eps_res  # quadrature of a trig sum is exact here
        else:
            # the midpoint rule sees an O(variation / N) spurious mean on
            # sampled compositions; gate above that floor
            uu = u(density.h.midpoints())
            vhat = float(np.sum(np.abs(np.diff(uu))))
            gate = max(cfg.eps_res, 2.0 * vhat / density.n)
        if abs(mean) > gate:
            raise MeanNotZero(
                f"hm-mean {mean:.3e} exceeds {gate:.3e}; the necessary "
                "condition for a coboundary fails")
        if isinstance(u, FourierSum):
            u = u + (-u.constant_part())
        # sampled inputs are not shifted: their exact mean is zero whenever
        # they really are coboundaries, and a spurious constant would stop
        # the series from telescoping to nothing

    symbolic = isinstance(u, FourierSum) and symbolic_transfer(pmap, u) is not None
    if symbolic:
        return _solve_symbolic(pmap, density, u, lam, cfg)
    return _solve_grid(pmap, density, u, lam, cfg)


def _l1_hm(obs_or_vals, density: InvariantDensity) -> float:
    vals = obs_or_vals.values if isinstance(obs_or_vals, GridFunction) else \
        obs_or_vals(density.h.midpoints()) if isinstance(obs_or_vals, Observable) \
        else obs_or_vals
    return norm_l1_hm(vals, density)


def _solve_symbolic(pmap, density, u: FourierSum, lam, cfg) -> SolveReport:
    term = u
    v = FourierSum(support=u.support)
    terms_used = 0
    tail = np.inf
    for j in range(1, cfg.j_max + 1):
        term = symbolic_transfer(pmap, term)
        weight = lam ** (j - 1)
        v = v + term * weight
        terms_used = j
        tail = weight * _l1_hm(term, density)
        if tail < cfg.eps_tail:
            break
    if tail >= cfg.eps_tail:
        raise NoConvergence(
            f"series tail still {tail:.3e} after {cfg.j_max} terms", residual=tail)
    if lam == 1.0:
        # an additive constant is free at lam = 1; pin the mean-zero one
        v = v + (-mean_hm(v, density))
    resid_obs = coboundary_apply(pmap, v, lam) + u * (-1.0)
    residual = _l1_hm(resid_obs, density)
    verdict = "Coboundary" if residual < cfg.eps_res else "NotCoboundary"
    grid = v.to_grid(density.n, density.h.support)
    return SolveReport(verdict, residual, terms_used, tail,
                       solution=grid, solution_obs=v, lam=lam)


def _solve_grid(pmap, density, u: Observable, lam, cfg) -> SolveReport:
    h = density.h
    term = normalized_transfer_apply(pmap, density, u)  # exact evaluation of u
    v = np.zeros(h.n)
    terms_used = 0
    tail = np.inf
    for j in range(1, cfg.j_max + 1):
        weight = lam ** (j - 1)
        v = v + weight * term.values
        terms_used = j
        tail = weight * norm_l1_hm(term.values, density)
        if tail < cfg.eps_tail:
            break
        if j < cfg.j_max:
            term = normalized_transfer_apply(pmap, density, term)
    if tail >= cfg.eps_tail:
        raise NoConvergence(
            f"series tail still {tail:.3e} after {cfg.j_max} terms", residual=tail)
    if lam == 1.0:
        v = v - mean_hm(v, density)
    vg = GridFunction(v, h.support)
    # residual of the cohomological equation, evaluated exactly for the
    # step representative of v
    xs = h.midpoints()
    lhs = vg(pmap.apply(xs)) - lam * v
    residual = norm_l1_hm(lhs - u(xs), density)
    verdict = "Coboundary" if residual < cfg.eps_res else "NotCoboundary"
    return SolveReport(verdict, residual, terms_used, tail,
                       solution=vg, solution_obs=vg, lam=lam)


# ---------------------------------------------------------------------------
# the depth ladder


def _is_constant(u: Observable, density: InvariantDensity, tol: float) -> bool:
    vals = u(density.h.midpoints())
    return float(np.max(vals) - np.min(vals)) < tol


def _witness_sample(pmap: PiecewiseMap, density: InvariantDensity, u: Observable):
    xs = density.h.midpoints()
    if pmap.horseshoe is not None:
        jl, jr = pmap.horseshoe.J
        xs = xs[(xs > jl) & (xs < jr)]
    jumps = u.jump_points()
    if len(jumps):
        jumps = jumps[(jumps > xs[0]) & (jumps < xs[-1])]
        xs = np.unique(np.concatenate([xs, jumps, np.nextafter(jumps, -np.inf)]))
    return xs


def ladder(pmap: PiecewiseMap, density: InvariantDensity, u0: Observable,
           cfg: SolverConfig | None = None) -> LadderResult:
    """Iterate the solve: u_{n+1} is the mean-zero solution for u_n.

    Stops at the first NotCoboundary rung (that rung index is the depth),
    at the constant verdict for u0, or with a caveat on solver errors.
    For mod-1 maps the coefficient-based depth bound is recorded.
    """
    cfg = cfg or SolverConfig()
    if _is_constant(u0, density, cfg.constant_tol):
        return LadderResult(None, True, [], [], [], [], [])

    chain = [u0]
    reports: list[SolveReport] = []
    caveat = ""
    depth = None
    while len(chain) <= cfg.max_depth:
        u_n = chain[-1]
        try:
            rep = neumann_solve(pmap, density, u_n, 1.0, cfg)
        except MeanNotZero as exc:
            # necessary condition failed: definitively not a coboundary
            rep = SolveReport("NotCoboundary", np.inf, 0, 0.0, note=str(exc))
        except NoConvergence as exc:
            reports.append(SolveReport("Inconclusive", np.nan, cfg.j_max,
                                       exc.residual or np.nan, note=str(exc)))
            caveat = "series did not converge; depth is a lower bound"
            depth = len(chain) - 1
            break
        reports.append(rep)
        if rep.verdict != "Coboundary":
            depth = len(chain) - 1
            break
        chain.append(normalize_mean(rep.solution_obs, density))
    else:
        depth = cfg.max_depth
        caveat = f"stopped at the configured depth cap {cfg.max_depth}"

    grids = [c.to_grid(density.n, density.h.support) if not isinstance(c, GridFunction)
             else c for c in chain]
    vtrace = [float(p_variation(c, cfg.p, _witness_sample(pmap, density, c)).value)
              for c in chain]
    strace = [float(np.max(np.abs(g.values))) for g in grids]

    bound = None
    obstruction = None
    if pmap.symbolic == "ladic":
        basis = fourier_kernel_basis(pmap.params["ell"], cfg.basis_n_max,
                                     density.h.support)
        table = coefficient_table(u0, basis, pmap, density, cfg.basis_levels)
        hit = first_obstruction(table, cfg.threshold)
        if hit != "constant":
            obstruction = hit
            m_const = bound_constant(basis, density, pmap.horseshoe)
            try:
                bound = depth_bound(table, u0, cfg.p, m_const)
            except NoObstruction:
                bound = None
    return LadderResult(depth, False, chain, grids, reports, vtrace, strace,
                        bound=bound, obstruction=obstruction, caveat=caveat)


def bound_constant(basis: list[BasisElement], density: InvariantDensity,
                   witness=None) -> float:
    """M = sup|phi_i| * b * C with C = k 2^j from the covering witness.

    Without a witness the covering constant defaults to 1, which is the
    exact value for a full-interval horseshoe (J = int of the core).
    """
    xs = density.h.midpoints()
    sup_phi = max(float(np.max(np.abs(el.phi(xs)))) for el in basis)
    c_cover = 1.0
    if witness is not None:
        c_cover = witness.covering_k * 2.0 ** witness.covering_j
    return sup_phi * density.b * c_cover


def depth_bound(table: CoefficientTable, u0: Observable, p: float,
                m_const: float, threshold: float = 1e-5) -> float:
    """Upper bound (|c[i][q+1]| + M v_p(u0)) / |c[i][q]| on the ladder depth.

    (i, q) is the first obstruction of the table; scaling u0 leaves the
    bound unchanged by homogeneity.
    """
    hit = first_obstruction(table, threshold)
    if hit == "constant":
        raise NoObstruction("every coefficient is below threshold at this truncation")
    ident, q = hit
    if q + 1 > table.levels:
        raise ValueError("table needs level q+1 for the depth bound")
    vp = p_variation(u0, p).value
    return (abs(table.entry(ident, q + 1)) + m_const * vp) / abs(table.entry(ident, q))


def alternating_coefficient_check(tables: list[CoefficientTable], ident: str,
                                  q: int, quad_n: int | None = None) -> bool:
    """Sign-alternation of c[i][q] along the chain plus the telescoped sum.

    tables[n] is the coefficient table of rung n.  Tolerances scale with
    the rung index at the quadrature rate 5/N.
    """
    n_quad = quad_n or tables[0].quadrature_n
    slack = 5.0 / n_quad
    m = len(tables) - 1
    c0 = tables[0].entry(ident, q)
    for n in range(m + 1):
        cn = tables[n].entry(ident, q)
        if abs(cn - (-1.0) ** n * c0) > max(n, 1) * slack:
            return False
    lhs = m * c0
    rhs = (-1.0) ** m * tables[m].entry(ident, q + 1) - tables[0].entry(ident, q + 1)
    return abs(lhs - rhs) <= (m + 1) * slack


def horseshoe_variation_check(pmap: PiecewiseMap, u: Observable, p: float,
                              n_sample: int = 4096, tol: float = 1e-9) -> bool:
    """Variation growth on the horseshoe interval: v_p(Lu) >= v_p(u) on J."""
    if pmap.horseshoe is None:
        raise MissingWitness("attach a horseshoe witness with find_horseshoe first")
    jl, jr = pmap.horseshoe.J
    lu = coboundary_apply(pmap, u)

    def sample_for(f):
        xs = midpoints(n_sample, pmap.core)
        xs = xs[(xs > jl) & (xs < jr)]
        jumps = f.jump_points()
        if len(jumps):
            jumps = jumps[(jumps > jl) & (jumps < jr)]
            xs = np.unique(np.concatenate([xs, jumps, np.nextafter(jumps, -np.inf)]))
        return xs

    v_u = p_variation(u, p, sample_for(u)).value
    v_lu = p_variation(lu, p, sample_for(lu)).value
    return v_lu >= v_u - tol


def uniqueness_check(pmap: PiecewiseMap, density: InvariantDensity,
                     u0: Observable, cfg: SolverConfig | None = None,
                     tol: float = 1e-5) -> bool:
    """Re-run the ladder with a different truncation schedule; rungs must
    agree outright (they are mean-zero, so 'up to a constant' means equal)."""
    cfg = cfg or SolverConfig()
    alt = SolverConfig(eps_tail=cfg.eps_tail * 1e-2, eps_res=cfg.eps_res,
                       j_max=cfg.j_max + 57, max_depth=cfg.max_depth,
                       constant_tol=cfg.constant_tol, threshold=cfg.threshold,
                       p=cfg.p, basis_n_max=cfg.basis_n_max,
                       basis_levels=cfg.basis_levels)
    la = ladder(pmap, density, u0, cfg)
    lb = ladder(pmap, density, u0, alt)
    if la.constant != lb.constant or la.depth != lb.depth:
        return False
    for ga, gb in zip(la.chain_grids[1:], lb.chain_grids[1:]):
        if float(np.max(np.abs(ga.values - gb.values))) > tol:
            return False
    return True


def transport_ladder(h: Homeomorphism, result: LadderResult,
                     source_map: PiecewiseMap, target_map: PiecewiseMap,
                     density: InvariantDensity,
                     mismatch_tol: float = 1e-9) -> LadderResult:
    """Carry a completed ladder through a conjugacy H with H o T~ = T o H.

    The chain is composed with H^{-1}; the semiconjugacy identity is
    checked on the grid first (more than 0.1% of sample points off raises
    ConjugacyViolation), then every rung is re-verified on the target
    side.  p-variations transfer exactly because corresponding samples
    are pulled through the same points.
    """
    xs = density.h.midpoints()
    lhs = h.forward(source_map.apply(xs))
    rhs = target_map.apply(h.forward(xs))
    bad = np.abs(lhs - rhs) > mismatch_tol
    if np.mean(bad) > 1e-3:
        raise ConjugacyViolation(
            f"H o T~ = T o H fails at {100 * np.mean(bad):.2f}% of sample points")

    a, b = h.forward(np.array(density.h.support))
    tgt_support = (min(a, b), max(a, b))
    chain = [Composed(u, h.inverse, tgt_support) for u in result.chain]
    n = density.n
    ys = midpoints(n, tgt_support)
    grids = [GridFunction(c(ys), tgt_support) for c in chain]

    reports = []
    for i, u_i in enumerate(chain):
        w = u_i
        for _ in range(i):
            w = LinComb([1.0, -1.0], [Composed(w, target_map.apply, tgt_support), w],
                        tgt_support)
        resid = float(np.mean(np.abs(w(ys) - chain[0](ys))))
        reports.append(SolveReport("Coboundary" if i else "Transported",
                                   resid, 0, 0.0, solution=grids[i],
                                   solution_obs=u_i))

    vtrace = [float(p_variation(tgt_u, 1.0, ys).value) for tgt_u in chain]
    strace = [float(np.max(np.abs(g.values))) for g in grids]
    return LadderResult(result.depth, result.constant, chain, grids, reports,
                        vtrace, strace, bound=result.bound,
                        obstruction=result.obstruction, caveat=result.caveat)
