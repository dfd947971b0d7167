"""Instance families: worked examples, hardness reductions and lower-bound constructions.

Reduction parameters are computed with :class:`fractions.Fraction` and only
converted to floats when the instance is built, so thresholds are as exact as
the float format allows.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction

from .core import Element, Instance
from .errors import AllZero, EpsOutOfRange, ValidationError


@dataclass(frozen=True)
class SspInstance:
    """Subset sum: is there a subset of ``a`` summing to ``theta``?"""

    a: tuple[int, ...]
    theta: int

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))
        if not self.a or any(v <= 0 for v in self.a):
            raise ValidationError(f"SSP entries must be positive integers, got {self.a}")
        if not 0 < self.theta or 2 * self.theta > sum(self.a):
            raise ValidationError(f"SSP target must lie in (0, S/2], got theta={self.theta}, S={sum(self.a)}")

    @property
    def total(self) -> int:
        return sum(self.a)


@dataclass(frozen=True)
class BalancedSspInstance:
    """Balanced subset sum: do some ``k`` of the ``2k`` near-equal entries sum to ``S/2``?"""

    a: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))
        if not self.a or len(self.a) % 2 or any(v <= 0 for v in self.a):
            raise ValidationError(f"balanced SSP needs an even number of positive integers, got {self.a}")
        k = len(self.a) // 2
        # max/min <= 1 + 1/(100k), cross-multiplied
        if 100 * k * max(self.a) > (100 * k + 1) * min(self.a):
            raise ValidationError(f"balanced SSP entries violate max/min <= 1 + 1/(100k): {self.a}")

    @property
    def k(self) -> int:
        return len(self.a) // 2

    @property
    def total(self) -> int:
        return sum(self.a)


def _instance(rows) -> Instance:
    """Build from ``(id, mass, mu, f)`` rows holding Fractions or numbers."""
    return Instance(tuple(Element(i, float(m), float(u), float(p)) for i, m, u, p in rows))


def gen_bghn(eps: float) -> Instance:
    """Four points of mass 1/4 whose distance from calibration is exactly ``eps``."""
    if not 0.0 < eps < 1.0 / 6.0:
        raise EpsOutOfRange(f"eps must lie in (0, 1/6), got {eps}")
    lo, hi = 0.5 - eps, 0.5 + eps
    return _instance(
        [
            ("x0-", 0.25, 0.0, lo),
            ("x1-", 0.25, 1.0, lo),
            ("x0+", 0.25, 0.0, hi),
            ("x1+", 0.25, 1.0, hi),
        ]
    )


def noiseless_parameters(ssp: SspInstance) -> tuple[Fraction, Fraction]:
    """``(p*, alpha)`` for the noiseless reduction."""
    p = Fraction(ssp.theta, 4 * ssp.total)
    return p, p / (1 - 2 * p)


def gen_noiseless_reduction(ssp: SspInstance) -> tuple[Instance, float]:
    """Noiseless instance whose distance is at most ``alpha * p*`` iff ``ssp`` is a Yes instance."""
    p, alpha = noiseless_parameters(ssp)
    S = ssp.total
    half = Fraction(1, 2)
    rows = [
        ("x0", Fraction(1, 4) - p / 2, 0, half),
        ("x1", Fraction(1, 4) + p / 2, 1, half),
    ]
    rows += [(f"x0+_{i + 1}", Fraction(a, 4 * S), 0, half + alpha) for i, a in enumerate(ssp.a)]
    rows.append(("x1+", Fraction(1, 4), 1, half + alpha))
    return _instance(rows), float(alpha * p)


def _uniform_rows(bssp: BalancedSspInstance, x_mu):
    n, k = len(bssp.a), bssp.k
    mass = Fraction(1, 3 * n)
    half = Fraction(1, 2)
    rows = [(f"x{i + 1}", mass, x_mu(a), half) for i, a in enumerate(bssp.a)]
    rows += [(f"x'{i + 1}", mass, half - Fraction(1, 4 * k), half) for i in range(n)]
    rows += [(f"x''{i + 1}", mass, half, half + Fraction(1, 6 * k)) for i in range(n)]
    return rows


def gen_uniform_reduction(bssp: BalancedSspInstance) -> tuple[Instance, float]:
    """Uniform-marginal instance on ``6k`` points; distance at most ``1/(36k)`` iff Yes."""
    S = bssp.total
    if 2 * max(bssp.a) > S:
        # only possible for k = 1 with unequal entries, a trivial No instance
        raise ValidationError(f"entry {max(bssp.a)} exceeds S/2 = {Fraction(S, 2)}; its label mean would exceed 1")
    rows = _uniform_rows(bssp, lambda a: Fraction(1, 2) + Fraction(a, S))
    return _instance(rows), float(Fraction(1, 36 * bssp.k))


def gen_rounded_uniform_reduction(bssp: BalancedSspInstance) -> Instance:
    """The uniform reduction with every ``x_i`` label mean replaced by ``1/2 + 1/(2k)``."""
    mu = Fraction(1, 2) + Fraction(1, 2 * bssp.k)
    return _instance(_uniform_rows(bssp, lambda a: mu))


def partition_to_balanced_ssp(a) -> BalancedSspInstance:
    """Pad a partition instance with ``n`` copies of ``M = 100 n S`` and shift every entry by ``M``."""
    a = [int(v) for v in a]
    if not a or any(v <= 0 for v in a):
        raise ValidationError(f"partition entries must be positive integers, got {a}")
    n = len(a)
    M = 100 * n * sum(a)
    return BalancedSspInstance(tuple(v + M for v in a) + (M,) * n)


class Signature(str, enum.Enum):
    REGULAR_MULTIPLE = "regular_multiple"
    IMBALANCED = "imbalanced"
    COSTLY = "costly"


def signature_mu(a: int, b: int, c: int) -> Fraction:
    return Fraction(6 * a - 3 * b, a + b + c)


def signature_cost(a: int, b: int, c: int) -> Fraction:
    mu = signature_mu(a, b, c)
    return (a + b) * max(-mu, Fraction(0)) + c * max(2 - mu, Fraction(0))


def classify_signature(a: int, b: int, c: int) -> Signature:
    """First branch of the integer-triple trichotomy that holds for ``(a, b, c)``."""
    if min(a, b, c) < 0:
        raise ValidationError(f"signature counts must be non-negative, got {(a, b, c)}")
    if a == b == c == 0:
        raise AllZero("signature (0, 0, 0) has no branch")
    if (b == 2 * a and c == 0) or (b == 0 and c == 2 * a):
        return Signature.REGULAR_MULTIPLE
    if 2 * a > b + c:
        return Signature.IMBALANCED
    if signature_cost(a, b, c) >= 1:
        return Signature.COSTLY
    raise AssertionError(f"no branch holds for {(a, b, c)}")  # the trichotomy rules this out


class SplitMix64:
    """The splitmix64 generator (Steele, Lea and Flood), fixed here for byte-reproducible instances."""

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = int(seed) & self._MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self._MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)

    def bit(self) -> int:
        return self.next() >> 63


class Mode(str, enum.Enum):
    PURE = "pure"
    MIXED = "mixed"


def distinguishing_bits(k: int, seed: int) -> list[int]:
    """Labels of ``x_1..x_4k`` in mixed mode: the top bit of successive splitmix64 outputs."""
    rng = SplitMix64(seed)
    return [rng.bit() for _ in range(4 * k)]


def gen_distinguishing(k: int, gamma: float, mode: str | Mode = Mode.PURE, seed: int = 0) -> Instance:
    """The ``4k + 3`` point pure/mixed pair behind the sample lower bound."""
    mode = Mode(mode)
    if k < 1:
        raise ValidationError(f"k must be at least 1, got {k}")
    if not 0.0 < gamma < 1.0:
        raise ValidationError(f"gamma must lie in (0, 1), got {gamma}")
    mus = [0.5] * (4 * k) if mode is Mode.PURE else [float(b) for b in distinguishing_bits(k, seed)]
    rows = [
        ("bot", 1.0 - gamma, 0.5, 0.5),
        ("x-", gamma / 4, 0.5, 1 / 3),
        ("x+", gamma / 4, 0.5, 2 / 3),
    ]
    rows += [(f"x{i + 1}", gamma / (8 * k), u, 0.5) for i, u in enumerate(mus)]
    return _instance(rows)


def gen_one_sided_lb(k: int) -> Instance:
    """``k`` equal-mass points, perfectly calibrated, with ``mu = f = 1/3 + i/(3k)``."""
    if k < 1:
        raise ValidationError(f"k must be at least 1, got {k}")
    rows = []
    for i in range(1, k + 1):
        v = Fraction(1, 3) + Fraction(i, 3 * k)
        rows.append((f"x{i}", Fraction(1, k), v, v))
    return _instance(rows)


def ssp_brute_force(ssp: SspInstance) -> bool:
    """Exhaustive subset search; fine for a couple of dozen entries at most."""
    sums = {0}
    for v in ssp.a:
        sums |= {s + v for s in sums if s + v <= ssp.theta}
    return ssp.theta in sums


def balanced_ssp_brute_force(bssp: BalancedSspInstance) -> bool:
    S = bssp.total
    if S % 2:
        return False
    return any(sum(c) == S // 2 for c in itertools.combinations(bssp.a, bssp.k))


def partition_brute_force(a) -> bool:
    S = sum(a)
    return S % 2 == 0 and ssp_brute_force(SspInstance(tuple(a), S // 2))
