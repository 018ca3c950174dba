"""Partial metric spaces over real scalar points.

Two built-in spaces are provided: the max metric on the nonnegative reals and
a shifted Euclidean metric with constant self-distance ``a``.  Axiom checking
also accepts an arbitrary callable so that broken rules can be exercised.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import DomainError, RejectedInput

#: Comparison tolerance for every <=/>= test on metric values.
DELTA = 1e-12

MetricRule = Callable[[float, float], float]


class SpaceKind(str, Enum):
    MAX_RPLUS = "max_rplus"
    SHIFTED_EUCLIDEAN = "shifted_euclidean"


def as_point(value) -> float:
    """Coerce ``value`` to a finite float point."""
    x = float(value)
    if not math.isfinite(x):
        raise RejectedInput(f"point must be finite, got {value!r}")
    return x


@dataclass(frozen=True)
class PartialMetricSpace:
    kind: SpaceKind
    a: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "kind", SpaceKind(self.kind))
        object.__setattr__(self, "a", Fraction(self.a))
        if self.a < 0:
            raise RejectedInput("self-distance a must be nonnegative")
        if self.kind is SpaceKind.MAX_RPLUS and self.a != 0:
            raise RejectedInput("max_rplus takes no parameter a")

    @classmethod
    def max_rplus(cls) -> "PartialMetricSpace":
        return cls(SpaceKind.MAX_RPLUS)

    @classmethod
    def shifted_euclidean(cls, a) -> "PartialMetricSpace":
        return cls(SpaceKind.SHIFTED_EUCLIDEAN, Fraction(a))

    @property
    def constant_self_distance(self) -> float | None:
        """The common value of p(x, x) if the space has one, else None."""
        if self.kind is SpaceKind.SHIFTED_EUCLIDEAN:
            return float(self.a)
        return None

    def check_domain(self, x: float) -> None:
        if self.kind is SpaceKind.MAX_RPLUS and x < 0:
            raise DomainError(f"max_rplus is defined on [0, inf); got {x!r}")

    def __call__(self, x, y) -> float:
        x, y = as_point(x), as_point(y)
        self.check_domain(x)
        self.check_domain(y)
        if self.kind is SpaceKind.MAX_RPLUS:
            return max(x, y)
        return abs(x - y) + float(self.a)

    def eval_many(self, xs: np.ndarray, y: float) -> np.ndarray:
        """Vectorised ``p(xs[i], y)``."""
        y = as_point(y)
        self.check_domain(y)
        xs = np.asarray(xs, dtype=float)
        if self.kind is SpaceKind.MAX_RPLUS:
            if xs.size and xs.min() < 0:
                raise DomainError("max_rplus sequence takes a negative value")
            return np.maximum(xs, y)
        return np.abs(xs - y) + float(self.a)

    def pairwise(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Elementwise ``p(xs[i], ys[i])``."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if self.kind is SpaceKind.MAX_RPLUS:
            if (xs.size and xs.min() < 0) or (ys.size and ys.min() < 0):
                raise DomainError("max_rplus sequence takes a negative value")
            return np.maximum(xs, ys)
        return np.abs(xs - ys) + float(self.a)

    def describe(self) -> dict:
        d = {"kind": self.kind.value}
        if self.kind is SpaceKind.SHIFTED_EUCLIDEAN:
            d["a"] = _fraction_text(self.a)
        return d

    def __str__(self):
        if self.kind is SpaceKind.SHIFTED_EUCLIDEAN:
            return f"shifted_euclidean(a={_fraction_text(self.a)})"
        return "max_rplus"


def _fraction_text(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_space(kind: str, a: str | None = None) -> PartialMetricSpace:
    """Build a space from its descriptor; ``a`` is mandatory for shifted_euclidean."""
    kind = kind.strip()
    if kind == SpaceKind.MAX_RPLUS.value:
        if a is not None:
            raise RejectedInput("max_rplus takes no parameter a")
        return PartialMetricSpace.max_rplus()
    if kind == SpaceKind.SHIFTED_EUCLIDEAN.value:
        if a is None:
            raise RejectedInput("shifted_euclidean requires an explicit a")
        try:
            value = Fraction(a.strip())
        except (ValueError, ZeroDivisionError):
            raise RejectedInput(f"malformed decimal for a: {a!r}") from None
        return PartialMetricSpace.shifted_euclidean(value)
    raise RejectedInput(f"unknown space kind {kind!r}")


# ---------------------------------------------------------------------------
# axioms

@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple
    lhs: float
    rhs: float


@dataclass
class AxiomReport:
    checked_triples: int
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _le(lhs: float, rhs: float) -> bool:
    # NaN fails every comparison, so it is always reported
    return lhs <= rhs + DELTA


def _close(u: float, v: float) -> bool:
    return abs(u - v) <= DELTA


def axiom_check(space: Union[PartialMetricSpace, MetricRule],
                sample: Iterable) -> AxiomReport:
    """Check the four partial metric axioms exhaustively on ``sample``.

    p1 and p3 run over ordered pairs, p2 over unordered pairs of distinct
    points, p4 over all ordered triples.
    """
    pts = [as_point(v) for v in sample]
    if not pts:
        raise RejectedInput("sample must be nonempty")
    p = space
    report = AxiomReport(checked_triples=len(pts) ** 3)
    bad = report.violations

    for x, y in itertools.product(pts, repeat=2):
        pxx, pxy = p(x, x), p(x, y)
        if not (pxx >= -DELTA and _le(pxx, pxy)):
            bad.append(Violation("p1", (x, y), pxx, pxy))
        pyx = p(y, x)
        if not _close(pxy, pyx):
            bad.append(Violation("p3", (x, y), pxy, pyx))

    for x, y in itertools.combinations(pts, 2):
        if x == y:
            continue
        pxx, pxy, pyy = p(x, x), p(x, y), p(y, y)
        if _close(pxx, pxy) and _close(pxy, pyy):
            bad.append(Violation("p2", (x, y), pxy, pxx))

    for x, y, z in itertools.product(pts, repeat=3):
        lhs = p(x, y)
        rhs = p(x, z) + p(z, y) - p(z, z)
        if not _le(lhs, rhs):
            bad.append(Violation("p4", (x, y, z), lhs, rhs))
    return report


# ---------------------------------------------------------------------------
# balls and diameters

def closed_ball_contains(space: PartialMetricSpace, center, r, y) -> bool:
    r = float(r)
    if r < 0:
        raise RejectedInput("radius must be nonnegative")
    return space(center, y) <= space(center, center) + r + DELTA


def open_ball_contains(space: PartialMetricSpace, center, r, y) -> bool:
    r = float(r)
    if r < 0:
        raise RejectedInput("radius must be nonnegative")
    return space(center, y) < space(center, center) + r - DELTA


def set_diameter(space: PartialMetricSpace, points: Sequence) -> float:
    """Largest p(x, y) over all ordered pairs, diagonal included."""
    pts = [as_point(v) for v in points]
    if not pts:
        raise RejectedInput("diameter of an empty set is undefined")
    return max(space(x, y) for x, y in itertools.product(pts, repeat=2))
