"""Run configuration: a small YAML/JSON key-value tree describing the
map, the observable, the grid, tolerances and truncation limits.

Unknown keys are rejected (with a line hint when the text is available);
grid_n must be a power of two >= 64 so dyadic kernel-pair endpoints stay
on grid edges.
"""

from __future__ import annotations

import csv as _csv
import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .maps import PiecewiseMap, build_map, find_horseshoe
from .observables import (FourierSum, GridFunction, Observable,
                          PiecewiseLinear, StepFunction)

_MAP_KEYS = {"kind", "ell", "beta", "pieces", "peak", "shear", "core", "horseshoe"}
_OBS_KEYS = {"kind", "modes", "breaks", "values", "knots", "path", "support"}
_TOL_KEYS = {"eps_tail", "eps_res", "threshold", "density_tol"}
_BASIS_KEYS = {"n_max", "levels", "budget"}
_LIMIT_KEYS = {"j_max", "max_iter", "max_depth", "trials", "n_decay"}
_TOP_KEYS = {"map", "observable", "grid_n", "seed", "lambda", "tolerances",
             "basis", "limits", "output_dir", "p"}


@dataclass
class RunConfig:
    map: dict
    observable: dict | None
    grid_n: int = 4096
    seed: int = 0
    lam: float = 1.0
    p: float = 1.0
    eps_tail: float = 1e-10
    eps_res: float = 1e-6
    threshold: float = 1e-5
    density_tol: float = 1e-12
    basis_n_max: int = 19
    basis_levels: int = 3
    basis_budget: int = 8
    j_max: int = 200
    max_iter: int = 5000
    max_depth: int = 64
    trials: int = 8
    n_decay: int = 8
    output_dir: str | None = None
    raw: dict = field(default_factory=dict)

    def canonical(self) -> dict:
        out = {k: v for k, v in self.raw.items()}
        out.setdefault("grid_n", self.grid_n)
        out.setdefault("seed", self.seed)
        return out

    def hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"),
                          default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _line_of(text: str | None, key: str) -> str:
    if not text:
        return ""
    for i, line in enumerate(text.splitlines(), 1):
        if key + ":" in line:
            return f" (line {i})"
    return ""


def _check_keys(tree: dict, allowed: set, where: str, text: str | None):
    for k in tree:
        if k not in allowed:
            raise ConfigError(
                f"unknown key {k!r} under {where}{_line_of(text, k)}")


def parse_config(source, text: str | None = None) -> RunConfig:
    """Parse a config from a path, YAML text, or an already-loaded dict."""
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        text = Path(source).read_text()
        source = text
    if isinstance(source, str):
        try:
            tree = yaml.safe_load(source)
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        text = source
    else:
        tree = source
    if not isinstance(tree, dict):
        raise ConfigError("config must be a key-value tree")
    _check_keys(tree, _TOP_KEYS, "the top level", text)
    if "map" not in tree:
        raise ConfigError("config needs a 'map' section")
    _check_keys(tree["map"], _MAP_KEYS, "'map'", text)
    if tree.get("observable") is not None:
        _check_keys(tree["observable"], _OBS_KEYS, "'observable'", text)
    for sect, keys in (("tolerances", _TOL_KEYS), ("basis", _BASIS_KEYS),
                       ("limits", _LIMIT_KEYS)):
        if tree.get(sect) is not None:
            _check_keys(tree[sect], keys, f"'{sect}'", text)

    grid_n = int(tree.get("grid_n", 4096))
    if grid_n < 64 or grid_n & (grid_n - 1):
        raise ConfigError(
            f"grid_n must be a power of two >= 64, got {grid_n}"
            f"{_line_of(text, 'grid_n')}")
    tol = tree.get("tolerances") or {}
    basis = tree.get("basis") or {}
    lim = tree.get("limits") or {}
    cfg = RunConfig(
        map=tree["map"],
        observable=tree.get("observable"),
        grid_n=grid_n,
        seed=int(tree.get("seed", 0)),
        lam=float(tree.get("lambda", 1.0)),
        p=float(tree.get("p", 1.0)),
        eps_tail=float(tol.get("eps_tail", 1e-10)),
        eps_res=float(tol.get("eps_res", 1e-6)),
        threshold=float(tol.get("threshold", 1e-5)),
        density_tol=float(tol.get("density_tol", 1e-12)),
        basis_n_max=int(basis.get("n_max", 19)),
        basis_levels=int(basis.get("levels", 3)),
        basis_budget=int(basis.get("budget", 8)),
        j_max=int(lim.get("j_max", 200)),
        max_iter=int(lim.get("max_iter", 5000)),
        max_depth=int(lim.get("max_depth", 64)),
        trials=int(lim.get("trials", 8)),
        n_decay=int(lim.get("n_decay", 8)),
        output_dir=tree.get("output_dir"),
        raw=tree,
    )
    for name in ("eps_tail", "eps_res", "threshold", "density_tol"):
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"tolerance {name} must be positive")
    return cfg


def config_to_map(cfg: RunConfig) -> PiecewiseMap:
    spec = dict(cfg.map)
    kind = spec.pop("kind", None)
    if kind is None:
        raise ConfigError("map section needs a 'kind'")
    hs = spec.pop("horseshoe", None)
    try:
        pmap = build_map(kind, **spec)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for map kind {kind!r}: {exc}") from exc
    if hs is not None:
        find_horseshoe(pmap, tuple(hs["J"]), tuple(hs["J1"]), tuple(hs["J2"]))
    return pmap


def config_to_observable(cfg: RunConfig, support=(0.0, 1.0),
                         base_dir: Path | None = None) -> Observable:
    spec = cfg.observable
    if spec is None:
        raise ConfigError("this command needs an 'observable' section")
    kind = spec.get("kind")
    sup = tuple(spec.get("support", support))
    if kind == "fourier":
        modes = [(Fraction(str(n)), float(a), float(b))
                 for n, a, b in spec["modes"]]
        return FourierSum.from_modes(modes, sup)
    if kind == "step":
        return StepFunction(np.asarray(spec["breaks"], dtype=float),
                            np.asarray(spec["values"], dtype=float), sup)
    if kind == "linear":
        knots = np.asarray(spec["knots"], dtype=float)
        return PiecewiseLinear(knots[:, 0], knots[:, 1], sup)
    if kind == "csv":
        path = Path(spec["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return load_observable_csv(path)
    raise ConfigError(f"unknown observable kind {kind!r}")


def load_observable_csv(path) -> GridFunction:
    """Two-column sample file, header `x,value`, decimal point, newline rows."""
    xs, vals = [], []
    with open(path, newline="") as fh:
        reader = _csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:2]] != ["x", "value"]:
            raise ConfigError(f"{path}: expected header 'x,value'")
        for row in reader:
            if not row:
                continue
            xs.append(float(row[0]))
            vals.append(float(row[1]))
    xs = np.asarray(xs)
    vals = np.asarray(vals)
    if len(xs) < 2:
        raise ConfigError(f"{path}: need at least two samples")
    dx = np.diff(xs)
    if np.max(np.abs(dx - dx[0])) > 1e-9 * abs(dx[0]):
        raise ConfigError(f"{path}: sample points must be uniformly spaced midpoints")
    lo = xs[0] - dx[0] / 2
    hi = xs[-1] + dx[0] / 2
    return GridFunction(vals, (lo, hi))
