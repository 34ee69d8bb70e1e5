"""Programmatic invariant suites behind the `verify` subcommand.

Each check returns (name, ok, detail); the CLI prints the pass/fail table
and exits nonzero on any failure.  Counts are kept small enough for an
interactive run; the pytest suite runs the full-size versions.
"""

from __future__ import annotations

import numpy as np

from .basis import coefficient_table, fourier_kernel_basis, gram_schmidt, kernel_family
from .cohomology import coboundary_apply, horseshoe_variation_check
from .config import RunConfig, config_to_observable
from .maps import PiecewiseMap
from .observables import inner_product_hm, mean_hm, midpoints, norm_l1_hm
from .pvariation import p_variation
from .transfer import (compute_invariant_density, koopman_apply,
                       normalized_transfer_apply, perron_frobenius_apply)
from .testfuncs import random_bv_observable


def brute_force_pvar(vals, p):
    """Exhaustive maximum over all subsequences, exact per-chain summation.

    Obviously correct and independent of the production DP; exponential,
    keep n <= ~14.
    """
    import math

    fv = [float(v) for v in vals]
    n = len(fv)
    best = 0.0

    def rec(idx, terms):
        nonlocal best
        s = math.fsum(terms)
        if s > best:
            best = s
        for j in range(idx + 1, n):
            d = abs(fv[j] - fv[idx])
            terms.append(d if p == 1.0 else d ** p)
            rec(j, terms)
            terms.pop()

    for i in range(n):
        rec(i, [])
    return best if p == 1.0 else best ** (1.0 / p)


def run_verification(cfg: RunConfig, pmap: PiecewiseMap, count: int = 100):
    rng = np.random.default_rng(cfg.seed)
    checks = []
    dens = compute_invariant_density(pmap, cfg.grid_n, cfg.density_tol,
                                     cfg.max_iter)
    n = cfg.grid_n
    lo, hi = dens.h.support
    xs = dens.h.midpoints()
    budget = 5.0 / n

    # structural round trip
    pts = rng.uniform(lo, hi, 1000)
    idx = pmap.branch_index(pts)
    worst = 0.0
    for j, br in enumerate(pmap.branches):
        m = idx == j
        if np.any(m):
            worst = max(worst, float(np.max(np.abs(
                br.inverse(br.forward(pts[m])) - pts[m]))))
    checks.append(("inverse round trip", worst < 1e-10, f"max err {worst:.2e}"))

    cols = np.asarray(dens.ulam.matrix.sum(axis=0)).ravel() if dens.ulam is not None \
        else np.ones(1)
    err = float(np.max(np.abs(cols - 1.0)))
    checks.append(("ulam column sums", err < 1e-10, f"max dev {err:.2e}"))
    checks.append(("density fixed point", dens.residual < 1e-8,
                   f"residual {dens.residual:.2e}"))

    d_err = a_err = pu_err = 0.0
    for _ in range(count):
        f = random_bv_observable(rng, dens.h.support).to_grid(n, dens.h.support)
        g = random_bv_observable(rng, dens.h.support).to_grid(n, dens.h.support)
        phi_f = perron_frobenius_apply(pmap, f, n=n)
        lhs = float(np.sum(phi_f.values * g.values)) * (hi - lo) / n
        rhs = float(np.sum(f.values * g(pmap.apply(xs)))) * (hi - lo) / n
        d_err = max(d_err, abs(lhs - rhs))
        pu = normalized_transfer_apply(pmap, dens, f)
        a1 = inner_product_hm(pu.values, g.values, dens)
        a2 = inner_product_hm(f.values, koopman_apply(pmap, g)(xs), dens)
        a_err = max(a_err, abs(a1 - a2))
        puw = normalized_transfer_apply(pmap, dens, koopman_apply(pmap, f))
        pu_err = max(pu_err, norm_l1_hm(puw.values - f.values, dens))
    checks.append(("duality", d_err < budget, f"max err {d_err:.2e} vs {budget:.2e}"))
    checks.append(("adjointness", a_err < budget, f"max err {a_err:.2e}"))
    checks.append(("composition inverse (P o U)", pu_err < 1e-6,
                   f"max err {pu_err:.2e}"))

    # integral preservation
    f = random_bv_observable(rng, dens.h.support).to_grid(n, dens.h.support)
    i1 = float(np.sum(perron_frobenius_apply(pmap, f, n=n).values)) * (hi - lo) / n
    i0 = float(np.sum(f.values)) * (hi - lo) / n
    checks.append(("integral preservation", abs(i1 - i0) < 1e-8,
                   f"|diff| {abs(i1 - i0):.2e}"))

    if pmap.symbolic == "ladic":
        basis = fourier_kernel_basis(pmap.params["ell"], cfg.basis_n_max,
                                     dens.h.support)
        rec_err = 0.0
        for _ in range(min(count, 50)):
            w = random_bv_observable(rng, dens.h.support).to_grid(n, dens.h.support)
            tab_u = coefficient_table(w, basis, pmap, dens, 2)
            tab_uu = coefficient_table(koopman_apply(pmap, w), basis, pmap, dens, 2)
            tab_pu = coefficient_table(normalized_transfer_apply(pmap, dens, w),
                                       basis, pmap, dens, 1)
            for i in range(len(basis)):
                rec_err = max(rec_err,
                              abs(tab_uu.entries[i, 1] - tab_u.entries[i, 0]),
                              abs(tab_uu.entries[i, 0]),
                              abs(tab_pu.entries[i, 0] - tab_u.entries[i, 1]))
        checks.append(("coefficient recurrences", rec_err < budget,
                       f"max err {rec_err:.2e}"))

    try:
        fam = kernel_family(pmap, dens, cfg.basis_budget)
        width = hi - lo
        k_err = max(float(np.sum(np.abs(perron_frobenius_apply(
            pmap, lambda x, p=phi: p(x) * dens.h(x), n=n).values))) * width / n
            for phi in fam)
        gs = gram_schmidt(fam, dens)
        mat = np.array([el.phi(xs) for el in gs])
        gram = (mat * dens.h.values * (hi - lo)) @ mat.T / n
        o_err = float(np.max(np.abs(gram - np.eye(len(gs)))))
        checks.append(("kernel family annihilation", k_err < 1e-8,
                       f"max L1 {k_err:.2e}"))
        checks.append(("orthonormalization", o_err < 1e-7, f"max dev {o_err:.2e}"))
    except Exception as exc:  # EmptyFamily on maps with disjoint branch images
        checks.append(("kernel family annihilation", False, str(exc)))

    if pmap.horseshoe is not None:
        bad = 0
        for _ in range(min(count, 200)):
            u = random_bv_observable(rng, dens.h.support, smooth=False)
            for p in (1.0, 2.0):
                if not horseshoe_variation_check(pmap, u, p, n_sample=n):
                    bad += 1
        checks.append(("variation growth on horseshoe", bad == 0,
                       f"{bad} counterexamples"))

    # p-variation dynamic program vs exhaustive subsequences (same floats)
    worst = 0.0
    for _ in range(25):
        vals = rng.uniform(-1, 1, int(rng.integers(5, 13)))
        for p in (1.0, 1.5, 2.0):
            worst = max(worst, abs(p_variation(vals, p).value
                                   - brute_force_pvar(vals, p)))
    checks.append(("p-variation DP vs brute force", worst == 0.0,
                   f"max |diff| {worst:.2e}"))

    if cfg.observable is not None:
        u0 = config_to_observable(cfg, dens.h.support)
        lv = coboundary_apply(pmap, u0)
        m = abs(mean_hm(lv(xs), dens))
        checks.append(("coboundary mean zero", m < 1e-6, f"|mean| {m:.2e}"))
    return checks
