"""Reference claims about specific limit sets, compared against computed ones."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .analysis import LimitSetEstimate, Verdict, exceedance_indices
from .density import density_estimate
from .pm_core import SpaceKind

#: exceedance density is probed at this epsilon for every disputed point
PROBE_EPS = Fraction(1, 2)


@dataclass(frozen=True)
class Claim:
    space_kind: SpaceKind
    sequence_name: str
    r: Fraction
    kind: str                      # "limit_set" or "rough_limit_set"
    statement: str
    contains: Callable[[Fraction], bool]


CLAIMS = (
    Claim(SpaceKind.MAX_RPLUS, "example-2.1", Fraction(1), "limit_set",
          "st-LIM^1 = {0} U [1, inf)", lambda x: x == 0 or x >= 1),
    Claim(SpaceKind.MAX_RPLUS, "example-2.1", Fraction(1), "rough_limit_set",
          "LIM^1 = empty", lambda x: False),
)


def find_discrepancies(space, seq, est: LimitSetEstimate, kind: str, N: int) -> list[dict]:
    """Decisive disagreements between ``est`` and any matching claim."""
    name = getattr(seq, "name", "")
    out = []
    for claim in CLAIMS:
        if (claim.space_kind is not space.kind or claim.sequence_name != name
                or claim.r != est.r or claim.kind != kind):
            continue
        for p, v in zip(est.points, est.membership):
            claimed = claim.contains(p)
            if claimed and v.verdict is Verdict.NO or not claimed and v.verdict is Verdict.YES:
                exc = density_estimate(exceedance_indices(space, seq, p, est.r, PROBE_EPS, N), N)
                out.append({
                    "claim": claim.statement,
                    "point": float(p),
                    "claimed_member": claimed,
                    "computed": v.verdict.value,
                    "probe_eps": f"{PROBE_EPS.numerator}/{PROBE_EPS.denominator}",
                    "exceedance_density": exc.to_dict(),
                })
    return out
