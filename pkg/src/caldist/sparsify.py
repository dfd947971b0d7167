"""Distribution transforms that spend a little total variation for structure.

Each transform returns the new instance together with the total variation it
actually moved, measured on the joint law. Because the partition cost is
5-Lipschitz in the distribution, a transform costing ``tv`` moves the
distance from calibration by at most ``5 * tv``.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .core import Element, Instance, SolverKind, SolverResult, tv_distance
from .errors import DegenerateInstance, EpsOutOfRange, NotUniform
from .typesparse import DEFAULT_MAX_STATES, build_type_index, typesparse_caldist

_SNAP = 1e-9
PIPELINE_SHARE = 10  # the transform gets eps / 10


def _check_eps(eps):
    if not 0.0 < eps <= 1.0:
        raise EpsOutOfRange(f"eps must lie in (0, 1], got {eps}")


def _snap_floor(x: float) -> int:
    """``floor(x)``, except values within 1e-9 of an integer snap to it."""
    r = round(x)
    if abs(x - r) <= _SNAP:
        return int(r)
    return math.floor(x)


def round_mu(mu: float, step: float) -> float:
    """Round ``mu`` down to a multiple of ``step``; exact multiples are kept as given."""
    q = _snap_floor(mu / step)
    if abs(mu - q * step) <= _SNAP:
        return mu
    return min(1.0, max(0.0, q * step))


def _rebuild(inst: Instance, mass, mu) -> Instance:
    return Instance(tuple(Element(e.id, float(m), float(u), e.f) for e, m, u in zip(inst.elements, mass, mu)))


def type_sparsify_uniform(inst: Instance, eps: float) -> tuple[Instance, float]:
    _check_eps(eps)
    if not inst.is_uniform():
        raise NotUniform("type_sparsify_uniform needs a uniform marginal")
    n = len(inst)
    out = _rebuild(inst, [1.0 / n] * n, [round_mu(u, eps) for u in inst.mu])
    tv = tv_distance(inst, out)
    k = build_type_index(out).k
    assert k <= math.ceil(1.0 / eps) + 1, (k, eps)
    return out, tv


def round_mass(mass: float, delta: float, n: int) -> float:
    """Round a marginal mass down to a power of ``1 + delta``; tiny masses go to zero."""
    if mass <= delta / n:
        return 0.0
    e = math.floor(math.log(mass) / math.log1p(delta))
    a = (1.0 + delta) ** e
    while a > mass:
        e -= 1
        a = (1.0 + delta) ** e
    while (1.0 + delta) ** (e + 1) <= mass:
        e += 1
        a = (1.0 + delta) ** e
    return a


def type_sparsify_general(inst: Instance, eps: float) -> tuple[Instance, float]:
    """Round ``mu`` to multiples of ``eps/2`` and masses to powers of ``1 + eps/4``, then renormalize."""
    _check_eps(eps)
    mu = [round_mu(u, eps / 2.0) for u in inst.mu]
    delta = eps / 4.0
    n = len(inst)
    a = np.array([round_mass(m, delta, n) for m in inst.mass])
    total = math.fsum(a)
    mass = a / total
    out = _rebuild(inst, mass, mu)
    tv = tv_distance(inst, out)
    tix = build_type_index(out)
    distinct_mass = len({t[0] for t in tix.types})
    assert tix.k <= (math.ceil(1.0 / (eps / 2.0)) + 1) * distinct_mass, (tix.k, eps)
    return out, tv


def grid_size(n: int, eps: float) -> int:
    """Smallest power of two that is at least ``4 n / eps``."""
    target = 4.0 * n / eps
    N = 1
    while N < target:
        N *= 2
    return N


def discretize_counts(inst: Instance, eps: float, grid: int | None = None) -> tuple[np.ndarray, int]:
    """Floor every joint mass to a multiple of ``1/N``; returns integer counts ``(n, 2)`` and ``N``."""
    _check_eps(eps)
    n = len(inst)
    N = grid_size(n, eps) if grid is None else int(grid)
    if N < 4.0 * n / eps - _SNAP:
        raise EpsOutOfRange(f"grid {N} is below 4|X|/eps = {4.0 * n / eps:g}; the tv guarantee would not hold")
    joint = inst.joint() * N
    counts = np.array([[_snap_floor(v) for v in row] for row in joint], dtype=np.int64)
    counts = np.maximum(counts, 0)
    if counts.sum() == 0:
        raise DegenerateInstance(f"every joint mass floors to zero at grid N={N}")
    return counts, N


def instance_from_counts(inst: Instance, counts: np.ndarray) -> Instance:
    M = int(counts.sum())
    tot = counts.sum(axis=1)
    mass = tot / M
    mu = np.where(tot > 0, counts[:, 1] / np.where(tot > 0, tot, 1), 0.0)
    return _rebuild(inst, mass, mu)


def discretize(inst: Instance, eps: float, grid: int | None = None) -> tuple[Instance, float, int]:
    """Make every joint mass an integer multiple of ``1/M`` with ``M <= N``.

    ``mu`` is recomputed from the discretized joint. ``grid`` overrides ``N``.
    """
    counts, _ = discretize_counts(inst, eps, grid)
    out = instance_from_counts(inst, counts)
    return out, tv_distance(inst, out), int(counts.sum())


def pipeline_caldist(inst: Instance, eps: float, max_states: int = DEFAULT_MAX_STATES) -> SolverResult:
    """Sparsify with budget ``eps/10``, then solve the sparse instance exactly."""
    _check_eps(eps)
    t0 = time.perf_counter()
    budget_eps = eps / PIPELINE_SHARE
    if inst.is_uniform():
        sparse, tv = type_sparsify_uniform(inst, budget_eps)
        mode = "uniform"
    else:
        sparse, tv = type_sparsify_general(inst, budget_eps)
        mode = "general"
    res = typesparse_caldist(sparse, max_states=max_states)
    return SolverResult(
        value=res.value,
        witness=res.witness,
        solver=SolverKind.PIPELINE,
        additive_error_budget=5.0 * tv,
        wall_time=time.perf_counter() - t0,
        details={"mode": mode, "eps": eps, "transform_eps": budget_eps, "tv": tv, "k": res.details["k"]},
    )
