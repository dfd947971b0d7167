"""Exact distance from calibration by exhaustive search over set partitions.

Every set partition of the domain is visited once as a restricted-growth
string ``a`` (``a[0] = 0``, ``a[i] <= 1 + max(a[:i])``). Part costs are read
from a table indexed by subset bitmask, so a leaf costs ``O(#parts)``.
"""

from __future__ import annotations

import time

import numpy as np
from numba import njit

from .core import Instance, Partition, SolverKind, SolverResult
from .errors import DomainTooLarge

DEFAULT_MAX_N = 13
_PRUNE_SLACK = 1e-12


def subset_tables(inst: Instance):
    """Cost of every subset, and a lower bound on the cost of any superset.

    For a part ``T`` containing ``S``, ``cost(T) >= sum_{x in S} m(x)|f(x) - mu(T)|
    >= min_c sum_{x in S} m(x)|f(x) - c|``; the minimum is attained at one of
    the ``f`` values in ``S`` (a weighted median), which is what ``lower`` holds.
    """
    n = len(inst)
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    m, mu, f = np.asarray(inst.mass), np.asarray(inst.mu), np.asarray(inst.f)
    w = bits @ m
    wmu = bits @ (m * mu)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(w > 0, wmu / np.where(w > 0, w, 1.0), 0.0)
    cost = (bits * m[None, :] * np.abs(f[None, :] - mean[:, None])).sum(axis=1)
    spread = m[:, None] * np.abs(f[:, None] - f[None, :])  # [x, j]: m_x |f_x - f_j|
    around = bits @ spread
    around[bits == 0] = np.inf
    lower = np.where(masks == 0, 0.0, around.min(axis=1))
    lower = np.minimum(lower, cost)
    return cost, lower


@njit(cache=True)
def _search(n, cost, lower, prune):
    a = np.zeros(n, dtype=np.int64)
    used = np.zeros(n + 1, dtype=np.int64)  # parts used by the prefix a[:i]
    part = np.zeros(n + 1, dtype=np.int64)  # bitmask of each part
    best = np.inf
    best_a = np.zeros(n, dtype=np.int64)
    leaves = 0
    part[0] = 1
    if n == 1:
        return cost[1], best_a, 1
    used[1] = 1
    a[1] = -1
    i = 1
    while i >= 1:
        if a[i] >= 0:
            part[a[i]] ^= 1 << i
        a[i] += 1
        if a[i] > used[i]:
            a[i] = -1
            i -= 1
            continue
        part[a[i]] |= 1 << i
        nparts = used[i]
        if a[i] + 1 > nparts:
            nparts = a[i] + 1
        if prune:
            bound = 0.0
            for j in range(nparts):
                bound += lower[part[j]]
            if bound > best + _PRUNE_SLACK:
                continue
        if i == n - 1:
            leaves += 1
            c = 0.0
            for j in range(nparts):
                c += cost[part[j]]
            if c < best:
                best = c
                best_a[:] = a
            continue
        i += 1
        used[i] = nparts
        a[i] = -1
    return best, best_a, leaves


def oracle_caldist(inst: Instance, max_n: int = DEFAULT_MAX_N, prune: bool = False) -> SolverResult:
    """Minimum partition cost over all set partitions of the domain.

    ``prune`` enables a lossless branch-and-bound; the witness is identical
    either way (first minimum in restricted-growth order).
    """
    n = len(inst)
    if n > max_n:
        raise DomainTooLarge(f"domain has {n} elements, oracle limit max_n={max_n}", limit=max_n, requested=n)
    t0 = time.perf_counter()
    cost, lower = subset_tables(inst)
    best, rgs, leaves = _search(n, cost, lower, prune)
    witness = Partition(inst.ids, tuple(int(v) for v in rgs))
    return SolverResult(
        value=max(0.0, float(best)),
        witness=witness,
        solver=SolverKind.ORACLE,
        additive_error_budget=0.0,
        wall_time=time.perf_counter() - t0,
        details={"leaves": int(leaves), "prune": bool(prune)},
    )


def iter_rgs(n: int):
    """Yield every restricted-growth string of length ``n`` in lexicographic order."""
    if n == 0:
        yield ()
        return
    a = [0] * n

    def rec(i, used):
        if i == n:
            yield tuple(a)
            return
        for v in range(used + 1):
            a[i] = v
            yield from rec(i + 1, max(used, v + 1))

    yield from rec(1, 1)
