"""Command-line front end.

Subcommands: density, solve, depth, basis, verify.  Outputs are CSV data
files plus a JSON summary with stable key order, the tool version and a
canonical config hash, so two runs of the same config are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .basis import coefficient_table, first_obstruction, fourier_kernel_basis
from .cohomology import SolverConfig, ladder, neumann_solve
from .config import RunConfig, config_to_map, config_to_observable, parse_config
from .errors import LivsicError
from .transfer import compute_invariant_density
from .verify import run_verification

ENV_OUT = "LIVSIC_OUT"


def _solver_cfg(cfg: RunConfig) -> SolverConfig:
    return SolverConfig(eps_tail=cfg.eps_tail, eps_res=cfg.eps_res,
                        j_max=cfg.j_max, max_depth=cfg.max_depth,
                        threshold=cfg.threshold, p=cfg.p,
                        basis_n_max=cfg.basis_n_max,
                        basis_levels=cfg.basis_levels)


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, sort_keys=True, indent=2,
                               allow_nan=False) + "\n", encoding="utf-8")


def _write_csv(path: Path, header: str, columns):
    rows = np.column_stack(columns)
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _finite(x):
    x = float(x)
    return x if np.isfinite(x) else None


def _out_dir(cfg: RunConfig, args) -> Path:
    out = args.out or cfg.output_dir or os.environ.get(ENV_OUT, ".")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(args) -> RunConfig:
    cfg = parse_config(args.config)
    if args.grid:
        cfg.grid_n = args.grid
        cfg.raw["grid_n"] = args.grid
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.raw["seed"] = args.seed
    for name in ("eps_tail", "eps_res", "threshold"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
            cfg.raw.setdefault("tolerances", {})[name] = val
    if getattr(args, "lam", None) is not None:
        cfg.lam = args.lam
        cfg.raw["lambda"] = args.lam
    return cfg


def _stamp(cfg: RunConfig, pmap) -> dict:
    return {"version": __version__, "config_hash": cfg.hash(),
            "grid_n": cfg.grid_n, "map_kind": pmap.kind}


def cmd_density(args) -> int:
    cfg = _load(args)
    pmap = config_to_map(cfg)
    dens = compute_invariant_density(pmap, cfg.grid_n, cfg.density_tol,
                                     cfg.max_iter)
    out = _out_dir(cfg, args)
    _write_csv(out / "density.csv", "x,h", (dens.h.midpoints(), dens.h.values))
    payload = _stamp(cfg, pmap) | {
        "residual": dens.residual, "lower_bound": dens.a, "upper_bound": dens.b,
        "iterations": dens.iterations, "support": list(dens.h.support)}
    _write_json(out / "density_summary.json", payload)
    print(f"density: N={cfg.grid_n} residual={dens.residual:.3e} "
          f"bounds=[{dens.a:.6g}, {dens.b:.6g}] -> {out}/density.csv")
    return 0


def cmd_solve(args) -> int:
    cfg = _load(args)
    pmap = config_to_map(cfg)
    dens = compute_invariant_density(pmap, cfg.grid_n, cfg.density_tol,
                                     cfg.max_iter)
    u = config_to_observable(cfg, dens.h.support, Path(args.config).parent)
    report = neumann_solve(pmap, dens, u, cfg.lam, _solver_cfg(cfg))
    out = _out_dir(cfg, args)
    if report.solution is not None:
        _write_csv(out / "solution.csv", "x,v",
                   (report.solution.midpoints(), report.solution.values))
    payload = _stamp(cfg, pmap) | {
        "verdict": report.verdict, "residual": report.residual,
        "terms_used": report.terms_used, "tail_norm": report.tail_norm,
        "lambda": report.lam, "note": report.note}
    _write_json(out / "solve_report.json", payload)
    print(f"solve: {report.verdict} residual={report.residual:.3e} "
          f"terms={report.terms_used}")
    return 0 if report.verdict == "Coboundary" else 1


def cmd_depth(args) -> int:
    cfg = _load(args)
    pmap = config_to_map(cfg)
    dens = compute_invariant_density(pmap, cfg.grid_n, cfg.density_tol,
                                     cfg.max_iter)
    u0 = config_to_observable(cfg, dens.h.support, Path(args.config).parent)
    result = ladder(pmap, dens, u0, _solver_cfg(cfg))
    out = _out_dir(cfg, args)
    for i, g in enumerate(result.chain_grids):
        _write_csv(out / f"rung_{i:02d}.csv", "x,u", (g.midpoints(), g.values))
    if result.variation_trace:
        _write_csv(out / "variation_trace.csv", "rung,p_variation,sup",
                   (np.arange(len(result.variation_trace)),
                    np.array(result.variation_trace),
                    np.array(result.sup_trace)))
    payload = _stamp(cfg, pmap) | {
        "depth": result.depth, "constant": result.constant,
        "bound": _finite(result.bound) if result.bound is not None else None,
        "obstruction": list(result.obstruction) if result.obstruction else None,
        "caveat": result.caveat, "p": cfg.p,
        "variation_trace": [float(v) for v in result.variation_trace],
        "sup_trace": [float(v) for v in result.sup_trace],
        "rungs": [{"verdict": r.verdict, "residual": _finite(r.residual),
                   "terms_used": r.terms_used, "tail_norm": _finite(r.tail_norm)}
                  for r in result.rung_reports]}
    _write_json(out / "ladder_result.json", payload)
    label = "constant" if result.constant else result.depth
    print(f"depth: {label}" + (f" bound={result.bound:.4g}" if result.bound else ""))
    return 0 if not result.caveat else 1


def cmd_basis(args) -> int:
    cfg = _load(args)
    pmap = config_to_map(cfg)
    dens = compute_invariant_density(pmap, cfg.grid_n, cfg.density_tol,
                                     cfg.max_iter)
    u = config_to_observable(cfg, dens.h.support, Path(args.config).parent)
    if pmap.symbolic == "ladic":
        basis = fourier_kernel_basis(pmap.params["ell"], cfg.basis_n_max,
                                     dens.h.support)
        source = "fourier"
    else:
        from .basis import gram_schmidt, kernel_family

        basis = gram_schmidt(kernel_family(pmap, dens, cfg.basis_budget), dens)
        source = "kernel_pairs"
    table = coefficient_table(u, basis, pmap, dens, cfg.basis_levels)
    hit = first_obstruction(table, cfg.threshold)
    out = _out_dir(cfg, args)
    with open(out / "coefficients.csv", "w", newline="") as fh:
        fh.write("id," + ",".join(f"j{j}" for j in range(table.levels + 1)) + "\n")
        for i, ident in enumerate(table.ids):
            fh.write(ident + "," +
                     ",".join(repr(float(v)) for v in table.entries[i]) + "\n")
    payload = _stamp(cfg, pmap) | {
        "ids": table.ids, "levels": table.levels,
        "first_obstruction": list(hit) if hit != "constant" else "constant",
        "threshold": cfg.threshold, "n_max": cfg.basis_n_max,
        "budget": cfg.basis_budget, "source": source}
    _write_json(out / "basis_meta.json", payload)
    print(f"basis: {len(table.ids)} elements, first obstruction: {hit}")
    return 0


def cmd_verify(args) -> int:
    cfg = _load(args)
    pmap = config_to_map(cfg)
    checks = run_verification(cfg, pmap)
    out = _out_dir(cfg, args)
    passed = all(ok for _, ok, _ in checks)
    payload = {"version": __version__, "config_hash": cfg.hash(),
               "grid_n": cfg.grid_n, "map_kind": pmap.kind, "passed": bool(passed),
               "checks": [{"name": n, "ok": bool(ok), "detail": d}
                          for n, ok, d in checks]}
    _write_json(out / "verify_report.json", payload)
    width = max(len(n) for n, _, _ in checks)
    for name, ok, detail in checks:
        print(f"{name:<{width}}  {'pass' if ok else 'FAIL'}  {detail}")
    print(f"verify: {'all checks passed' if passed else 'FAILURES present'}")
    return 0 if passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="livsic",
        description="Transfer-operator numerics and coboundary solving for "
                    "piecewise expanding interval maps")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, doc in (
            ("density", cmd_density, "invariant density by the Ulam method"),
            ("solve", cmd_solve, "solve the (twisted) cohomological equation"),
            ("depth", cmd_depth, "run the depth ladder"),
            ("basis", cmd_basis, "coefficient table against the kernel basis"),
            ("verify", cmd_verify, "run the invariant property suites")):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="YAML/JSON config path")
        p.add_argument("--out", help=f"output directory (default ${ENV_OUT} or cwd)")
        p.add_argument("--grid", type=int, help="override grid_n")
        p.add_argument("--seed", type=int, help="override seed")
        p.add_argument("--eps-tail", dest="eps_tail", type=float)
        p.add_argument("--eps-res", dest="eps_res", type=float)
        p.add_argument("--threshold", type=float)
        if name == "solve":
            p.add_argument("--lam", type=float, help="twist parameter in (0, 1]")
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except LivsicError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
