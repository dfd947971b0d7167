"""Approximation scheme via k-special partitions.

With ``k = ceil(3/eps)`` intervals ``I_j = [j/k, (j+1)/k)`` (the last one
closed), a k-special partition has parts ``X_0..X_{k-1}`` where each part is
empty or has its label mean inside its own interval. Charging element ``x``
placed in part ``j`` the proxy cost

    D'(x) * (|f(x) - (j + 1/2)/k| + 1/(2k))

upper-bounds the true partition cost by at most ``1/k``. The instance is first
discretized so that all joint masses are integer multiples of ``1/M``; the DP
then runs over states ``(i, p)`` where ``p`` holds the integer 0-label and
1-label mass already placed in every part.

Two lossless prunings keep the reachable state set small:

* an incumbent bound: a state is dropped when its cost plus a lower bound on
  any completion exceeds the incumbent. The lower bound charges every
  remaining element its cheapest part, plus, for each part whose label mean
  sits outside its interval, a fractional-knapsack minimum of the extra cost
  needed to pull the mean back in (this also detects infeasible states);
* incumbent widening: the search starts with a tight bound and doubles the
  slack until a feasible final state survives, falling back to the one-part
  partition which is always feasible.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .core import Instance, Partition, SolverKind, SolverResult, tv_distance
from .errors import StateSpaceTooLarge
from .sparsify import _check_eps, discretize_counts, instance_from_counts

DEFAULT_MAX_STATES = 5_000_000
DISCRETIZE_SHARE = 15  # discretization gets eps / 15
INTERVAL_FACTOR = 3  # k = ceil(3 / eps)
_SLACK = 1e-12


def num_intervals(eps: float) -> int:
    return max(1, math.ceil(INTERVAL_FACTOR / eps - 1e-12))


def interval_of(c1: int, total: int, k: int) -> int:
    """Index of the interval holding ``c1 / total``, in exact integer arithmetic."""
    return min(k - 1, (k * c1) // total)


def _knapsack_curve(gain: np.ndarray, extra: np.ndarray):
    """Fractional knapsack: breakpoints of minimum extra cost versus gain reached."""
    use = gain > 0
    g, e = gain[use], extra[use]
    order = np.argsort(e / g, kind="stable")
    G = np.concatenate([[0.0], np.cumsum(g[order])])
    E = np.concatenate([[0.0], np.cumsum(e[order])])
    return G, E


class _Search:
    def __init__(self, counts: np.ndarray, f: np.ndarray, k: int):
        self.k = k
        self.c0 = counts[:, 0].astype(np.int64)
        self.c1 = counts[:, 1].astype(np.int64)
        self.M = int(counts.sum())
        self.order = np.argsort(-(self.c0 + self.c1), kind="stable")
        weight = (self.c0 + self.c1) / self.M
        mids = (np.arange(k) + 0.5) / k
        self.cost = weight[:, None] * (np.abs(f[:, None] - mids[None, :]) + 0.5 / k)
        self.cheapest = self.cost.min(axis=1)
        self.extra = self.cost - self.cheapest[:, None]
        self.states_seen = 0
        self._curves = {}

    def root_bound(self) -> float:
        return float(np.sum(self.cheapest))

    def one_part(self) -> tuple[float, int]:
        j = interval_of(int(self.c1.sum()), self.M, self.k)
        return float(np.sum(self.cost[:, j])), j

    def _curves_for(self, step: int):
        if step not in self._curves:
            rest = self.order[step + 1:]
            r0, r1 = self.c0[rest].astype(float), self.c1[rest].astype(float)
            k = self.k
            up, down = [], []
            for j in range(k):
                # scaled by k so everything stays integral
                up.append(_knapsack_curve((k - j) * r1 - j * r0, self.extra[rest, j]))
                down.append(_knapsack_curve((j + 1) * r0 - (k - j - 1) * r1, self.extra[rest, j]))
            self._curves[step] = (float(np.sum(self.cheapest[rest])), up, down)
        return self._curves[step]

    def _completion_bound(self, P: np.ndarray, step: int) -> np.ndarray:
        rest_cheapest, up, down = self._curves_for(step)
        k = self.k
        bound = np.full(P.shape[0], rest_cheapest)
        for j in range(k):
            p0 = P[:, 2 * j].astype(float)
            p1 = P[:, 2 * j + 1].astype(float)
            used = (p0 + p1) > 0  # an empty part may stay empty
            # mean below j/k: need (k - j) p1 - j p0 >= 0 after completion
            need = j * p0 - (k - j) * p1
            lacking = used & (need > 0)
            if lacking.any():
                G, E = up[j]
                nd = need[lacking]
                bound[lacking] += np.where(nd > G[-1], np.inf, np.interp(nd, G, E))
            if j < k - 1:
                # mean at or above (j+1)/k: need (j+1) p0 - (k-j-1) p1 >= 1
                need = (k - j - 1) * p1 - (j + 1) * p0 + 1
                lacking = used & (need > 0)
                if lacking.any():
                    G, E = down[j]
                    nd = need[lacking]
                    bound[lacking] += np.where(nd > G[-1], np.inf, np.interp(nd, G, E))
        return bound

    def run(self, incumbent: float, max_states: int):
        """One pass with a fixed incumbent; returns (value, labels) or None."""
        k, n = self.k, len(self.c0)
        P = np.zeros((1, 2 * k), dtype=np.int64)
        V = np.zeros(1)
        layers = []
        placed = 0
        for step, x in enumerate(self.order):
            S = P.shape[0]
            part = np.repeat(np.arange(k), S)
            parent = np.tile(np.arange(S), k)
            Q = np.tile(P, (k, 1))
            rows = np.arange(k * S)
            Q[rows, 2 * part] += self.c0[x]
            Q[rows, 2 * part + 1] += self.c1[x]
            NV = np.tile(V, k) + np.repeat(self.cost[x], S)
            keep = NV + self._completion_bound(Q, step) <= incumbent + _SLACK
            Q, NV, part, parent = Q[keep], NV[keep], part[keep], parent[keep]
            if NV.size == 0:
                return None
            # one state per p-vector, keeping the cheapest (first on ties)
            o = np.argsort(NV, kind="stable")
            Q, NV, part, parent = Q[o], NV[o], part[o], parent[o]
            keys = np.ascontiguousarray(Q).view(np.dtype((np.void, Q.dtype.itemsize * Q.shape[1]))).ravel()
            _, first = np.unique(keys, return_index=True)
            first.sort()
            P, V = Q[first], NV[first]
            layers.append((parent[first], part[first]))
            placed += int(self.c0[x] + self.c1[x])
            if __debug__:
                assert np.all(P.sum(axis=1) == placed)
            self.states_seen += P.shape[0]
            if self.states_seen > max_states:
                raise StateSpaceTooLarge(
                    f"PTAS visited more than max_states={max_states} states (k={k}, M={self.M})",
                    limit=max_states,
                    requested=self.states_seen,
                )
        t = P[:, 0::2] + P[:, 1::2]
        p1 = P[:, 1::2]
        js = np.arange(k)
        inside = (p1 * k >= js * t) & ((p1 * k < (js + 1) * t) | (js == k - 1))
        ok = np.all((t == 0) | inside, axis=1)
        if not ok.any():
            return None
        cand = np.flatnonzero(ok)
        best = cand[np.argmin(V[cand])]
        labels = np.zeros(n, dtype=int)
        s = best
        for step in range(n - 1, -1, -1):
            parent, part = layers[step]
            labels[self.order[step]] = part[s]
            s = parent[s]
        return float(V[best]), labels


def ptas_caldist(inst: Instance, eps: float, max_states: int = DEFAULT_MAX_STATES) -> SolverResult:
    """Approximate distance from calibration within ``[CalDist - budget, CalDist + eps]``.

    ``budget`` is five times the total variation spent by discretization.
    """
    _check_eps(eps)
    t0 = time.perf_counter()
    k = num_intervals(eps)
    disc_eps = eps / DISCRETIZE_SHARE
    counts, N = discretize_counts(inst, disc_eps)
    disc = instance_from_counts(inst, counts)
    tv = tv_distance(inst, disc)
    search = _Search(counts, np.asarray(inst.f, dtype=float), k)
    fallback, _ = search.one_part()
    floor = search.root_bound()
    slack = (fallback - floor) / 16.0
    passes = 0
    while True:
        passes += 1
        incumbent = fallback if slack >= fallback - floor else floor + slack
        found = search.run(incumbent, max_states)
        if found is not None:
            break
        if incumbent >= fallback:
            raise AssertionError("one-part partition must be k-special")  # pragma: no cover
        slack *= 2.0
    value, labels = found
    _check_special(counts, labels, k)
    return SolverResult(
        value=value,
        witness=Partition(inst.ids, tuple(int(v) for v in labels)),
        solver=SolverKind.PTAS,
        additive_error_budget=5.0 * tv,
        wall_time=time.perf_counter() - t0,
        details={
            "eps": eps,
            "k": k,
            "discretize_eps": disc_eps,
            "N": N,
            "M": int(counts.sum()),
            "tv": tv,
            "passes": passes,
            "states": search.states_seen,
        },
    )


def _check_special(counts: np.ndarray, labels: np.ndarray, k: int) -> None:
    """Recompute every part's label mean from the discretized counts."""
    for j in np.unique(labels):
        c = counts[labels == j].sum(axis=0)
        total = int(c.sum())
        if total == 0:
            continue
        assert interval_of(int(c[1]), total, k) == j, (j, c)
