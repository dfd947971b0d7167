"""Sampling, empirical distributions and the statistical experiments.

Every trial derives its own generator from ``SeedSequence([seed, trial])``,
so a report is identical however the trials are scheduled.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import Instance, tv_distance
from .errors import EmptySample, ValidationError
from .generators import gen_distinguishing, gen_one_sided_lb
from .oracle import oracle_caldist
from .typesparse import typesparse_caldist

QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)
# m = ceil(c |X| / eps^2); c pinned by scripts/calibrate_experiments.py
TWO_SIDED_C = 1.0


def fingerprint(inst: Instance) -> str:
    """sha256 over a canonical rendering of the instance."""
    rows = [[e.id, repr(e.mass), repr(e.mu), repr(e.f)] for e in inst.elements]
    return hashlib.sha256(json.dumps(rows, separators=(",", ":")).encode()).hexdigest()


@dataclass(frozen=True)
class LabeledSample:
    draws: tuple[tuple[str, int], ...]
    seed: int
    source_fingerprint: str
    source: Instance = field(repr=False, compare=False)

    def __post_init__(self):
        index = self.source.index
        for x, _ in self.draws:
            if x not in index:
                raise ValidationError(f"sample draw {x!r} is not an element of the source instance")

    def __len__(self):
        return len(self.draws)


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(trial)]).generate_state(1, dtype=np.uint64)[0])


def _draw_indices(inst: Instance, m: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Element indices by inverse CDF over cumulative mass, then Bernoulli labels."""
    cum = np.cumsum(inst.mass)
    u = rng.random(m) * cum[-1]
    # side="right": u equal to a boundary goes to the next element, so zero-mass elements are never drawn
    idx = np.searchsorted(cum, u, side="right")
    last = int(np.flatnonzero(inst.mass > 0)[-1])
    idx = np.minimum(idx, last)
    labels = (rng.random(m) < inst.mu[idx]).astype(np.int64)
    return idx, labels


def draw_sample(inst: Instance, m: int, seed: int) -> LabeledSample:
    if m < 1:
        raise ValidationError(f"sample size must be at least 1, got {m}")
    idx, labels = _draw_indices(inst, m, np.random.default_rng(seed))
    ids = inst.ids
    draws = tuple((ids[i], int(b)) for i, b in zip(idx, labels))
    return LabeledSample(draws, int(seed), fingerprint(inst), inst)


def _empirical_from_counts(inst: Instance, counts: np.ndarray, ones: np.ndarray) -> Instance:
    m = int(counts.sum())
    keep = np.flatnonzero(counts > 0)
    return Instance.from_arrays(
        counts[keep] / m,
        ones[keep] / counts[keep],
        inst.f[keep],
        ids=[inst.ids[i] for i in keep],
    )


def empirical_instance(s: LabeledSample) -> Instance:
    """Empirical law of the sample over its support, in source order; ``f`` copied by id."""
    if len(s) == 0:
        raise EmptySample("cannot build an empirical instance from an empty sample")
    inst = s.source
    n = len(inst)
    idx = np.array([inst.index[x] for x, _ in s.draws])
    labels = np.array([b for _, b in s.draws])
    counts = np.bincount(idx, minlength=n)
    ones = np.bincount(idx, weights=labels, minlength=n)
    return _empirical_from_counts(inst, counts, ones)


def solve(inst: Instance, solver: str = "oracle", eps: float | None = None):
    """Dispatch to a solver by name."""
    if solver == "oracle":
        return oracle_caldist(inst, prune=True)
    if solver == "typesparse":
        return typesparse_caldist(inst)
    if solver in ("ptas", "pipeline"):
        if eps is None:
            raise ValidationError(f"solver {solver!r} needs eps")
        if solver == "ptas":
            from .ptas import ptas_caldist

            return ptas_caldist(inst, eps)
        from .sparsify import pipeline_caldist

        return pipeline_caldist(inst, eps)
    raise ValidationError(f"unknown solver {solver!r}")


def empirical_caldist(inst: Instance, m: int, seed: int, solver: str = "oracle", eps: float | None = None) -> float:
    return solve(empirical_instance(draw_sample(inst, m, seed)), solver, eps).value


@dataclass
class ExperimentReport:
    name: str
    params: dict[str, Any]
    seed: int
    rows: list[dict[str, Any]] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)

    @property
    def values(self) -> np.ndarray:
        return np.array([r["value"] for r in self.rows], dtype=float)

    def to_csv(self) -> str:
        head = ["trial_index", "seed", "m", "value"]
        extras = sorted({k for r in self.rows for k in r} - set(head))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(head + extras)
        for r in self.rows:
            w.writerow([_cell(r.get(k, "")) for k in head + extras])
        return buf.getvalue()

    def summary_dict(self) -> dict[str, Any]:
        return {"experiment": self.name, "seed": self.seed, "params": self.params, "summary": self.summary}


def _cell(v):
    return repr(v) if isinstance(v, float) else v


def describe(values) -> dict[str, float]:
    v = np.asarray(values, dtype=float)
    out = {"count": int(v.size), "mean": float(v.mean())}
    for q in QUANTILES:
        out[f"q{round(q * 100):02d}"] = float(np.quantile(v, q))
    return out


def typical_flags(counts: np.ndarray, ones: np.ndarray, mu: np.ndarray, m: int) -> np.ndarray:
    """Sampled between ``m/(2k)`` and ``2m/k`` times, with label mean off by at least ``1/(300k)``."""
    k = len(counts)
    seen = counts > 0
    delta = np.where(seen, ones / np.where(seen, counts, 1) - mu, 0.0)
    return (2 * k * counts >= m) & (k * counts <= 2 * m) & (np.abs(delta) >= 1.0 / (300 * k))


def experiment_one_sided(k: int, trials: int, seed: int, m: int | None = None) -> ExperimentReport:
    """Empirical distance on a perfectly calibrated instance, ``m = k^3`` samples per trial."""
    if not 1 <= k <= 12:
        raise ValidationError(f"k must lie in [1, 12] so the oracle stays feasible, got {k}")
    m = k**3 if m is None else int(m)
    inst = gen_one_sided_lb(k)
    rep = ExperimentReport("one-sided", {"k": k, "m": m, "trials": trials}, seed)
    for t in range(trials):
        s = trial_seed(seed, t)
        idx, labels = _draw_indices(inst, m, np.random.default_rng(s))
        counts = np.bincount(idx, minlength=k)
        ones = np.bincount(idx, weights=labels, minlength=k)
        value = oracle_caldist(_empirical_from_counts(inst, counts, ones), prune=True).value
        typical = int(typical_flags(counts, ones, inst.mu, m).sum())
        rep.rows.append({"trial_index": t, "seed": s, "m": m, "value": value, "typical": typical})
    vals = rep.values
    typ = np.array([r["typical"] for r in rep.rows])
    rep.summary = {
        "value": describe(vals),
        "fraction_positive": float(np.mean(vals > 1e-12)),
        "fraction_trials_typical_ge_0.9k": float(np.mean(typ >= 0.9 * k)),
        "fraction_trials_typical_ge_0.8k": float(np.mean(typ >= 0.8 * k)),
        "mean_typical_fraction": float(typ.mean() / k),
    }
    return rep


def two_sided_sample_size(c: float, n: int, eps: float) -> int:
    return math.ceil(c * n / eps**2)


def experiment_two_sided(inst: Instance, eps_grid, trials: int, seed: int, c: float) -> ExperimentReport:
    """Fraction of trials with ``|empirical - true| <= eps`` at ``m = ceil(c |X| / eps^2)``."""
    truth = oracle_caldist(inst, prune=True).value
    n = len(inst)
    rep = ExperimentReport("two-sided", {"n": n, "eps_grid": list(eps_grid), "trials": trials, "c": c}, seed)
    rep.summary = {"true_value": truth, "by_eps": {}}
    for g, eps in enumerate(eps_grid):
        m = two_sided_sample_size(c, n, eps)
        ok = tv_ok = implied = 0
        for t in range(trials):
            s = trial_seed(seed, g * trials + t)
            idx, labels = _draw_indices(inst, m, np.random.default_rng(s))
            counts = np.bincount(idx, minlength=n)
            ones = np.bincount(idx, weights=labels, minlength=n)
            emp = _empirical_from_counts(inst, counts, ones)
            value = oracle_caldist(emp, prune=True).value
            tv = tv_distance(inst, emp)
            err = abs(value - truth)
            ok += err <= eps
            tv_ok += tv <= eps / 5
            # a tv within eps/5 must force the error within eps
            implied += (tv > eps / 5) or (err <= 5 * tv + 1e-9)
            rep.rows.append(
                {"trial_index": t, "seed": s, "m": m, "value": value, "eps": eps, "abs_error": err, "tv": tv}
            )
        rep.summary["by_eps"][repr(eps)] = {
            "m": m,
            "success_fraction": ok / trials,
            "tv_within_budget_fraction": tv_ok / trials,
            "lipschitz_holds_fraction": implied / trials,
        }
    return rep


def collision_bound(m: int, k: int, gamma: float) -> float:
    return m * m * gamma * gamma / (32 * k)


def default_collision_m(k: int, gamma: float) -> int:
    return math.ceil(math.sqrt(8 * k) / gamma)


def experiment_distinguishing(k: int, gamma: float, m_grid, trials: int, seed: int) -> ExperimentReport:
    """Pure versus mixed gap, and how often ``m`` draws repeat one of the ``x_i``."""
    pure = gen_distinguishing(k, gamma, "pure")
    rep = ExperimentReport("distinguish", {"k": k, "gamma": gamma, "m_grid": list(m_grid), "trials": trials}, seed)
    gap: dict[str, Any] = {"pure": typesparse_caldist(pure).value, "pure_expected": gamma / 12}
    mixed = gen_distinguishing(k, gamma, "mixed", seed)
    ones = int(round(sum(mixed.mu[3:])))
    gap["mixed_seed"] = seed
    gap["mixed_ones"] = ones
    gap["mixed"] = typesparse_caldist(mixed).value
    gap["mixed_bound"] = gamma / 16
    if k <= 2:
        gap["pure_oracle"] = oracle_caldist(pure, prune=True).value
        gap["mixed_oracle"] = oracle_caldist(mixed, prune=True).value
    rep.summary = {"gap": gap, "collisions": {}}
    # draws land on x_1..x_4k (indices 3..) each with mass gamma/(8k)
    for g, m in enumerate(m_grid):
        hits = 0
        for t in range(trials):
            s = trial_seed(seed, g * trials + t)
            idx, _ = _draw_indices(pure, m, np.random.default_rng(s))
            xs = np.sort(idx[idx >= 3])
            collided = bool(np.any(xs[1:] == xs[:-1]))
            hits += collided
            rep.rows.append({"trial_index": t, "seed": s, "m": m, "value": float(collided)})
        p = hits / trials
        se = math.sqrt(p * (1 - p) / trials)
        rep.summary["collisions"][str(m)] = {
            "frequency": p,
            "bound": collision_bound(m, k, gamma),
            "standard_error": se,
            "within_bound": p <= collision_bound(m, k, gamma) + 3 * se,
        }
    return rep
