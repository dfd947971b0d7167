"""Exact distance from calibration for instances with few element types.

The type of an element is its ``(mass, mu)`` pair. Some optimal calibrated
predictor preserves the ``f``-order within every type, so it suffices to
search contiguous partitions: each part takes a consecutive run from every
type's ``f``-sorted list. With ``n_i`` elements of type ``i`` the frontier
vectors ``m`` (``0 <= m_i <= n_i``) index a dense DP table and

    opt(m) = min_{m' <= m, m' != m} opt(m') + cost(X(m', m)).

Slice costs come from per-type prefix sums of ``mass``, ``mass*mu`` and
``mass*f`` plus a binary search for where ``f`` crosses the slice mean.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import Instance, Partition, SolverKind, SolverResult
from .errors import StateSpaceTooLarge

TYPE_TOL = 1e-12
DEFAULT_MAX_STATES = 1_000_000
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class TypeIndex:
    types: tuple[tuple[float, float], ...]
    members: tuple[np.ndarray, ...]  # element indices per type, f ascending
    f_sorted: tuple[np.ndarray, ...]
    cum_mass: tuple[np.ndarray, ...]  # length n_i + 1, leading zero
    cum_mass_mu: tuple[np.ndarray, ...]
    cum_mass_f: tuple[np.ndarray, ...]

    @property
    def k(self) -> int:
        return len(self.types)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(len(m) for m in self.members)

    @property
    def num_states(self) -> int:
        return int(np.prod([c + 1 for c in self.counts], dtype=object))


def _prefix(values):
    return np.concatenate([[0.0], np.cumsum(values)])


def build_type_index(inst: Instance) -> TypeIndex:
    """Group elements whose ``(mass, mu)`` agree within 1e-12, first-fit in element order."""
    reps: list[tuple[float, float]] = []
    groups: list[list[int]] = []
    for i, (m, u) in enumerate(zip(inst.mass, inst.mu)):
        for t, (tm, tu) in enumerate(reps):
            if abs(m - tm) <= TYPE_TOL and abs(u - tu) <= TYPE_TOL:
                groups[t].append(i)
                break
        else:
            reps.append((float(m), float(u)))
            groups.append([i])
    members, fs, cm, cmu, cf = [], [], [], [], []
    for g in groups:
        g = np.array(g, dtype=int)
        g = g[np.argsort(inst.f[g], kind="stable")]
        members.append(g)
        fs.append(inst.f[g].copy())
        cm.append(_prefix(inst.mass[g]))
        cmu.append(_prefix(inst.mass[g] * inst.mu[g]))
        cf.append(_prefix(inst.mass[g] * inst.f[g]))
    return TypeIndex(tuple(reps), tuple(members), tuple(fs), tuple(cm), tuple(cmu), tuple(cf))


def slice_costs(tix: TypeIndex, lo: list[np.ndarray], hi: tuple[int, ...]) -> np.ndarray:
    """Cost of ``X(m', m)`` for a batch of lower frontiers ``m'`` and one upper ``m``.

    ``lo[i]`` holds the batch of ``m'_i`` values; ``hi[i]`` is ``m_i``.
    """
    shape = lo[0].shape
    w = np.zeros(shape)
    wmu = np.zeros(shape)
    for i in range(tix.k):
        w += tix.cum_mass[i][hi[i]] - tix.cum_mass[i][lo[i]]
        wmu += tix.cum_mass_mu[i][hi[i]] - tix.cum_mass_mu[i][lo[i]]
    positive = w > 0
    mean = np.where(positive, wmu / np.where(positive, w, 1.0), 0.0)
    total = np.zeros(shape)
    for i in range(tix.k):
        if hi[i] == 0:
            continue
        cm, cf = tix.cum_mass[i], tix.cum_mass_f[i]
        # elements with index < cross have f strictly below the mean
        cross = np.searchsorted(tix.f_sorted[i], mean, side="left")
        cross = np.clip(cross, lo[i], hi[i])
        below = mean * (cm[cross] - cm[lo[i]]) - (cf[cross] - cf[lo[i]])
        above = (cf[hi[i]] - cf[cross]) - mean * (cm[hi[i]] - cm[cross])
        total += below + above
    return np.where(positive, np.maximum(total, 0.0), 0.0)


def typesparse_caldist(inst: Instance, max_states: int = DEFAULT_MAX_STATES) -> SolverResult:
    t0 = time.perf_counter()
    tix = build_type_index(inst)
    dims = tuple(c + 1 for c in tix.counts)
    num_states = tix.num_states
    if num_states > max_states:
        raise StateSpaceTooLarge(
            f"type-sparse DP needs {num_states} states (k={tix.k} types), limit max_states={max_states}",
            limit=max_states,
            requested=num_states,
        )
    opt = np.full(num_states, np.inf)
    parts = np.zeros(num_states, dtype=np.int64)
    parent = np.full(num_states, -1, dtype=np.int64)
    opt[0] = 0.0
    strides = np.array([int(np.prod(dims[i + 1:], dtype=np.int64)) for i in range(len(dims))], dtype=np.int64)
    for flat in range(1, num_states):
        m = np.unravel_index(flat, dims)
        # all m' <= m entrywise, flattened in increasing lexicographic order
        grids = np.meshgrid(*[np.arange(mi + 1) for mi in m], indexing="ij")
        lo = [g.ravel() for g in grids]
        prev = np.zeros(lo[0].shape, dtype=np.int64)
        for i in range(len(dims)):
            prev += lo[i] * strides[i]
        prev, lo = prev[:-1], [g[:-1] for g in lo]  # drop m' == m
        cand = opt[prev] + slice_costs(tix, lo, tuple(int(v) for v in m))
        best = cand.min()
        tied = np.flatnonzero(cand <= best + _TIE_TOL)
        fewest = tied[parts[prev[tied]] == parts[prev[tied]].min()]
        pick = fewest[-1]  # first in decreasing lexicographic order
        opt[flat] = cand[pick]
        parent[flat] = prev[pick]
        parts[flat] = parts[prev[pick]] + 1
    labels = np.zeros(len(inst), dtype=int)
    state, part = num_states - 1, 0
    segments = []
    while state > 0:
        segments.append((parent[state], state))
        state = parent[state]
    for part, (a, b) in enumerate(reversed(segments)):
        ma, mb = np.unravel_index(a, dims), np.unravel_index(b, dims)
        for i in range(tix.k):
            labels[tix.members[i][ma[i]:mb[i]]] = part
    witness = Partition(inst.ids, tuple(int(v) for v in labels))
    return SolverResult(
        value=float(opt[num_states - 1]),
        witness=witness,
        solver=SolverKind.TYPESPARSE,
        additive_error_budget=0.0,
        wall_time=time.perf_counter() - t0,
        details={"k": tix.k, "states": num_states},
    )
