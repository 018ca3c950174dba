"""Exact natural-density estimates on finite prefixes.

A density estimate is a pair of exact rationals, the member fraction at ``N``
and at ``N // 2``.  The verdict rule turns that pair into Zero, Positive or
Inconclusive; it never guesses.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import RejectedInput
from .seq_spec import IndexPredicate

DEFAULT_TAU = Fraction(1, 100)
DEFAULT_N = 100_000


class DensityKind(str, Enum):
    ZERO = "Zero"
    POSITIVE = "Positive"
    INCONCLUSIVE = "Inconclusive"


def frac_text(q: Fraction) -> str:
    """Render as ``p/q`` always, including integers (``0/1``)."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class DensityEstimate:
    count_N: int
    N: int
    count_half: int

    @property
    def half(self) -> int:
        return self.N // 2

    @property
    def value(self) -> Fraction:
        return Fraction(self.count_N, self.N)

    @property
    def value_half(self) -> Fraction:
        return Fraction(self.count_half, self.half)

    @property
    def stability_gap(self) -> Fraction:
        return abs(self.value - self.value_half)

    def to_dict(self) -> dict:
        return {
            "count": self.count_N,
            "N": self.N,
            "value": frac_text(self.value),
            "value_half": frac_text(self.value_half),
            "stability_gap": frac_text(self.stability_gap),
        }


@dataclass(frozen=True)
class DensityVerdict:
    verdict: DensityKind
    tau: Fraction
    evidence: DensityEstimate

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "tau": frac_text(self.tau),
                **self.evidence.to_dict()}


def prefix_count(index_set: IndexPredicate, N: int) -> int:
    if N < 1:
        raise RejectedInput("prefix length must be >= 1")
    return index_set.count(N)


def estimate_from_counts(count_N: int, count_half: int, N: int) -> DensityEstimate:
    if N < 2:
        raise RejectedInput("density estimates need N >= 2")
    if not 0 <= count_half <= count_N <= N:
        raise RejectedInput("inconsistent prefix counts")
    return DensityEstimate(count_N, N, count_half)


def density_estimate(index_set: IndexPredicate, N: int) -> DensityEstimate:
    if N < 2:
        raise RejectedInput("density estimates need N >= 2")
    return DensityEstimate(index_set.count(N), N, index_set.count(N // 2))


def check_tau(tau) -> Fraction:
    tau = Fraction(tau)
    if not 0 < tau < Fraction(1, 5):
        raise RejectedInput("tau must lie strictly between 0 and 1/5")
    return tau


def density_verdict(est: DensityEstimate, tau=DEFAULT_TAU) -> DensityVerdict:
    """Zero if small and not growing; Positive if large and stable."""
    tau = check_tau(tau)
    v = est.value
    if v <= tau and v <= est.value_half + tau / 10:
        kind = DensityKind.ZERO
    elif v >= 5 * tau and est.stability_gap <= tau:
        kind = DensityKind.POSITIVE
    else:
        kind = DensityKind.INCONCLUSIVE
    return DensityVerdict(kind, tau, est)
