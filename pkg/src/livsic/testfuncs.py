"""Random bounded-variation test functions for the property suites.

Variation and sup are kept bounded independently of any grid resolution:
the operator-identity checks rely on an O(sup * variation / N) error
budget, so generated functions keep total jump mass <= 2 and a small
low-frequency smooth part.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .observables import FourierSum, StepFunction


def random_bv_observable(rng, support=(0.0, 1.0), n_jumps: int = 16,
                         smooth: bool = True):
    """Random step function (jump mass <= 2) plus a small trig part."""
    lo, hi = support
    n_jumps = int(n_jumps)
    breaks = np.sort(rng.uniform(lo, hi, n_jumps))
    breaks = breaks[np.diff(np.concatenate([[lo], breaks])) > 1e-12]
    jumps = rng.uniform(-1.0, 1.0, len(breaks))
    jumps *= 2.0 / max(np.sum(np.abs(jumps)), 1e-12)
    vals = np.concatenate([[0.0], np.cumsum(jumps)])
    step = StepFunction(breaks, vals - vals.mean(), support)
    if not smooth:
        return step
    trig = FourierSum({Fraction(1): (rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)),
                       Fraction(2): (rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1))},
                      support)
    return step + trig


def random_band_limited(rng, n_max: int = 20, support=(0.0, 1.0)) -> FourierSum:
    """Random trig sum with integer frequencies 1..n_max (mean zero)."""
    modes = []
    for n in range(1, n_max + 1):
        scale = 1.0 / n
        modes.append((Fraction(n), scale * rng.uniform(-1, 1),
                      scale * rng.uniform(-1, 1)))
    return FourierSum.from_modes(modes, support)
