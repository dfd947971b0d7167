"""Data model and the cost/distance primitives shared by every solver.

An :class:`Instance` is a finite distribution over ``X x {0, 1}`` given by its
marginal masses and conditional label probabilities ``mu``, together with the
predictions ``f`` of the predictor under study.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DomainMismatch,
    EmptySubset,
    InvalidInstance,
    PartitionMismatch,
    ZeroMass,
)

TOL = 1e-9


@dataclass(frozen=True)
class Element:
    id: str
    mass: float
    mu: float
    f: float


@dataclass(frozen=True)
class Instance:
    elements: tuple[Element, ...]

    def __post_init__(self):
        elements = tuple(self.elements)
        object.__setattr__(self, "elements", elements)
        if not elements:
            raise InvalidInstance("instance has no elements")
        seen = set()
        for e in elements:
            if not isinstance(e.id, str) or not e.id:
                raise InvalidInstance(f"element id must be a non-empty string, got {e.id!r}")
            if e.id in seen:
                raise InvalidInstance(f"duplicate element id {e.id!r}")
            seen.add(e.id)
            for name in ("mass", "mu", "f"):
                v = getattr(e, name)
                if not isinstance(v, (int, float)) or math.isnan(v):
                    raise InvalidInstance(f"element {e.id!r}: {name} must be a number")
            if e.mass < 0:
                raise InvalidInstance(f"element {e.id!r}: mass {e.mass} is negative")
            if not 0.0 <= e.mu <= 1.0:
                raise InvalidInstance(f"element {e.id!r}: mu {e.mu} outside [0, 1]")
            if not 0.0 <= e.f <= 1.0:
                raise InvalidInstance(f"element {e.id!r}: f {e.f} outside [0, 1]")
        total = math.fsum(e.mass for e in elements)
        if abs(total - 1.0) > TOL:
            raise InvalidInstance(f"masses sum to {total!r}, expected 1 within {TOL}")

    @classmethod
    def from_arrays(cls, mass, mu, f, ids: Sequence[str] | None = None) -> "Instance":
        mass = [float(v) for v in mass]
        mu = [float(v) for v in mu]
        f = [float(v) for v in f]
        if not len(mass) == len(mu) == len(f):
            raise InvalidInstance("mass, mu and f must have equal length")
        if ids is None:
            ids = [f"x{i}" for i in range(len(mass))]
        return cls(tuple(Element(str(i), m, u, p) for i, m, u, p in zip(ids, mass, mu, f)))

    def __len__(self):
        return len(self.elements)

    @cached_property
    def ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.elements)

    @cached_property
    def index(self) -> dict[str, int]:
        return {e.id: i for i, e in enumerate(self.elements)}

    @cached_property
    def mass(self) -> np.ndarray:
        a = np.array([e.mass for e in self.elements], dtype=float)
        a.flags.writeable = False
        return a

    @cached_property
    def mu(self) -> np.ndarray:
        a = np.array([e.mu for e in self.elements], dtype=float)
        a.flags.writeable = False
        return a

    @cached_property
    def f(self) -> np.ndarray:
        a = np.array([e.f for e in self.elements], dtype=float)
        a.flags.writeable = False
        return a

    def joint(self) -> np.ndarray:
        """Joint masses as an ``(n, 2)`` array: column ``b`` holds ``D(x, b)``."""
        return np.column_stack([self.mass * (1.0 - self.mu), self.mass * self.mu])

    @property
    def positive_rate(self) -> float:
        return float(np.dot(self.mass, self.mu))

    def is_uniform(self, tol: float = TOL) -> bool:
        return bool(np.all(np.abs(self.mass - 1.0 / len(self)) <= tol))

    def is_noiseless(self) -> bool:
        return bool(np.all((self.mu == 0.0) | (self.mu == 1.0)))

    def with_f(self, f) -> "Instance":
        if isinstance(f, Predictor):
            f = f.aligned_to(self)
        return Instance.from_arrays(self.mass, self.mu, f, self.ids)

    def with_mu(self, mu) -> "Instance":
        return Instance.from_arrays(self.mass, mu, self.f, self.ids)

    def predictor(self) -> "Predictor":
        return Predictor(self.ids, tuple(float(v) for v in self.f))

    def subset_indices(self, subset: Iterable[str]) -> np.ndarray:
        try:
            idx = sorted({self.index[s] for s in subset})
        except KeyError as exc:
            raise DomainMismatch(f"unknown element id {exc.args[0]!r}") from None
        return np.array(idx, dtype=int)


@dataclass(frozen=True)
class Partition:
    """Assignment of element ids to parts, kept in canonical form.

    Part labels are compacted and numbered by first occurrence in ``ids`` order.
    """

    ids: tuple[str, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        ids = tuple(self.ids)
        labels = tuple(int(v) for v in self.labels)
        if len(ids) != len(labels):
            raise PartitionMismatch("ids and labels have different lengths")
        if len(set(ids)) != len(ids):
            raise PartitionMismatch("partition assigns an id twice")
        remap: dict[int, int] = {}
        canon = []
        for lab in labels:
            if lab not in remap:
                remap[lab] = len(remap)
            canon.append(remap[lab])
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "labels", tuple(canon))

    @classmethod
    def from_assignment(cls, assignment: Mapping[str, int], order: Sequence[str] | None = None) -> "Partition":
        if order is None:
            order = list(assignment)
        return cls(tuple(order), tuple(assignment[i] for i in order))

    @classmethod
    def from_parts(cls, inst: Instance, parts: Iterable[Iterable[str]]) -> "Partition":
        assignment: dict[str, int] = {}
        for j, part in enumerate(parts):
            for x in part:
                if x in assignment:
                    raise PartitionMismatch(f"id {x!r} appears in two parts")
                assignment[x] = j
        if set(assignment) != set(inst.ids):
            raise PartitionMismatch("parts do not cover the instance domain exactly")
        return cls.from_assignment(assignment, inst.ids)

    @classmethod
    def single(cls, inst: Instance) -> "Partition":
        return cls(inst.ids, (0,) * len(inst))

    @classmethod
    def singletons(cls, inst: Instance) -> "Partition":
        return cls(inst.ids, tuple(range(len(inst))))

    @property
    def num_parts(self) -> int:
        return max(self.labels) + 1 if self.labels else 0

    @property
    def assignment(self) -> dict[str, int]:
        return dict(zip(self.ids, self.labels))

    def parts(self) -> list[tuple[str, ...]]:
        out: list[list[str]] = [[] for _ in range(self.num_parts)]
        for i, lab in zip(self.ids, self.labels):
            out[lab].append(i)
        return [tuple(p) for p in out]

    def aligned_to(self, inst: Instance) -> np.ndarray:
        """Part label per element, in the instance's element order."""
        if len(self.ids) != len(inst) or set(self.ids) != set(inst.ids):
            raise PartitionMismatch("partition ids differ from the instance domain")
        lab = dict(zip(self.ids, self.labels))
        return np.array([lab[i] for i in inst.ids], dtype=int)

    def canonical_for(self, inst: Instance) -> "Partition":
        """The same partition re-expressed in the instance's id order."""
        return Partition(inst.ids, tuple(self.aligned_to(inst)))


@dataclass(frozen=True)
class Predictor:
    ids: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        ids, values = tuple(self.ids), tuple(float(v) for v in self.values)
        if len(ids) != len(values):
            raise DomainMismatch("ids and values have different lengths")
        for i, v in zip(ids, values):
            if not 0.0 <= v <= 1.0:
                raise DomainMismatch(f"prediction for {i!r} is {v}, outside [0, 1]")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, values: Mapping[str, float]) -> "Predictor":
        return cls(tuple(values), tuple(values.values()))

    def aligned_to(self, inst: Instance) -> np.ndarray:
        if len(self.ids) != len(inst) or set(self.ids) != set(inst.ids):
            raise DomainMismatch("predictor domain differs from the instance domain")
        val = dict(zip(self.ids, self.values))
        return np.array([val[i] for i in inst.ids], dtype=float)


class SolverKind(str, enum.Enum):
    ORACLE = "oracle"
    TYPESPARSE = "typesparse"
    PTAS = "ptas"
    PIPELINE = "pipeline"


@dataclass
class SolverResult:
    value: float
    witness: Partition | None
    solver: SolverKind
    additive_error_budget: float = 0.0
    wall_time: float = 0.0  # seconds
    details: dict = field(default_factory=dict)


def _subset_stats(inst: Instance, subset: Iterable[str]):
    idx = inst.subset_indices(subset)
    if idx.size == 0:
        raise EmptySubset("subset is empty")
    m = inst.mass[idx]
    total = math.fsum(m)
    if total <= 0.0:
        raise ZeroMass("subset has zero total mass")
    return idx, m, total


def mu_of_subset(inst: Instance, subset: Iterable[str]) -> float:
    idx, m, total = _subset_stats(inst, subset)
    return min(1.0, max(0.0, math.fsum(m * inst.mu[idx]) / total))


def cost_of_subset(inst: Instance, subset: Iterable[str]) -> float:
    idx, m, total = _subset_stats(inst, subset)
    mu = math.fsum(m * inst.mu[idx]) / total
    return math.fsum(m * np.abs(inst.f[idx] - mu))


def _part_means(inst: Instance, labels: np.ndarray):
    k = int(labels.max()) + 1
    w = np.bincount(labels, weights=inst.mass, minlength=k)
    wmu = np.bincount(labels, weights=inst.mass * inst.mu, minlength=k)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(w > 0, wmu / np.where(w > 0, w, 1.0), 0.0)
    return np.clip(means, 0.0, 1.0), w


def cost_of_partition(inst: Instance, p: Partition) -> float:
    """Sum of part costs; a part of zero total mass costs nothing."""
    labels = p.aligned_to(inst)
    means, _ = _part_means(inst, labels)
    return math.fsum(inst.mass * np.abs(inst.f - means[labels]))


def induced_predictor(inst: Instance, p: Partition) -> Predictor:
    labels = p.aligned_to(inst)
    means, _ = _part_means(inst, labels)
    return Predictor(inst.ids, tuple(float(v) for v in means[labels]))


def is_calibrated(inst: Instance, g: Predictor, tol: float = TOL) -> bool:
    values = g.aligned_to(inst)
    groups: dict[float, list[int]] = {}
    for i, v in enumerate(values):
        groups.setdefault(float(v), []).append(i)
    for alpha, idx in groups.items():
        m = inst.mass[idx]
        total = math.fsum(m)
        if total <= 0.0:
            continue
        if abs(math.fsum(m * inst.mu[idx]) / total - alpha) > tol:
            return False
    return True


def l1_distance(inst: Instance, f: Predictor, g: Predictor) -> float:
    a, b = f.aligned_to(inst), g.aligned_to(inst)
    return math.fsum(inst.mass * np.abs(a - b))


def tv_distance(a: Instance, b: Instance) -> float:
    """Total variation between the joint laws on ``X x {0, 1}``.

    Elements present on one side only contribute their full joint mass.
    """
    ja = dict(zip(a.ids, a.joint()))
    jb = dict(zip(b.ids, b.joint()))
    zero = np.zeros(2)
    terms = []
    for x in list(a.ids) + [i for i in b.ids if i not in ja]:
        terms.extend(np.abs(ja.get(x, zero) - jb.get(x, zero)))
    return min(1.0, 0.5 * math.fsum(terms))
