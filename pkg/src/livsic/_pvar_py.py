"""Pure-Python p-variation kernels (fallback twin of _pvar_ext).

Same contracts as the compiled module; kept dependency-free beyond numpy
so the package works without a C compiler.
"""

import numpy as np


def local_extrema_indices(values):
    """Indices of points that can appear in a maximizing subsequence.

    Keeps the first point, the last point, and every strict direction
    change after collapsing runs of equal values.  Interior points of a
    monotone run never help for p >= 1.
    """
    v = np.asarray(values, dtype=float)
    n = len(v)
    if n <= 2:
        return np.arange(n, dtype=np.int64)
    keep = [0]
    last = v[0]
    direction = 0  # -1 falling, +1 rising
    for i in range(1, n):
        x = v[i]
        if x == last:
            continue
        d = 1 if x > last else -1
        if d != direction and direction != 0:
            keep.append(prev)  # noqa: F821 - prev set below on first move
        direction = d
        last = x
        prev = i
    keep.append(n - 1)
    out = np.array(sorted(set(keep)), dtype=np.int64)
    return out


def pvar_p1(values):
    """Total variation: sum of |increments| over the extrema subsequence.

    Returns (value, witness_indices) with witness indices into `values`.
    """
    idx = local_extrema_indices(values)
    v = np.asarray(values, dtype=float)[idx]
    if len(v) < 2:
        return 0.0, idx[:1]
    total = 0.0
    for i in range(1, len(v)):
        total += abs(v[i] - v[i - 1])
    return total, idx


def pvar_dp(values, p):
    """Maximize sum |f(a_i) - f(a_{i-1})|^p over subsequences, O(n^2).

    `values` should already be extrema-reduced; correctness does not
    depend on it but the cost does.  Returns (best_sum, witness_indices)
    where the witness attains best_sum summed left to right.
    """
    v = np.asarray(values, dtype=float)
    n = len(v)
    if n < 2:
        return 0.0, np.arange(n, dtype=np.int64)
    best = np.zeros(n)
    link = np.full(n, -1, dtype=np.int64)
    for j in range(1, n):
        bj = 0.0
        lj = -1
        vj = v[j]
        for i in range(j):
            cand = best[i] + abs(vj - v[i]) ** p
            if cand > bj:
                bj = cand
                lj = i
        best[j] = bj
        link[j] = lj
    end = int(np.argmax(best))
    if best[end] <= 0.0:
        return 0.0, np.array([0], dtype=np.int64)
    chain = []
    k = end
    while k >= 0:
        chain.append(k)
        k = link[k]
    chain.reverse()
    return float(best[end]), np.array(chain, dtype=np.int64)
