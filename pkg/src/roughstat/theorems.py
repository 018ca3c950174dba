"""Finite-prefix checks of conditional statements about rough limit sets.

Each check evaluates a hypothesis and a conclusion with the analysis engines
and combines them into Pass / Vacuous / Fail / Inconclusive.  A check can only
Fail when its hypothesis was established and its conclusion refuted.
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable

import numpy as np

from . import analysis as an
from .analysis import EpsSchedule, Grid, Verdict
from .density import DEFAULT_N, DEFAULT_TAU, DensityKind, density_estimate, density_verdict, frac_text
from .errors import RejectedInput
from .pm_core import DELTA, PartialMetricSpace, closed_ball_contains, set_diameter
from .seq_spec import (All, Alternating, And, Const, Even, IndexPredicate, Not, Odd,
                       PerfectSquare, Reciprocal, Residue, SequenceSpec, alternating,
                       paper_example_sequence, reciprocal, restrict_for_length)


class Status(str, Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"


class Outcome(str, Enum):
    PASS = "Pass"
    VACUOUS = "Vacuous"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"


def status_of(v: Verdict) -> Status:
    return {Verdict.YES: Status.HOLDS, Verdict.NO: Status.FAILS,
            Verdict.INCONCLUSIVE: Status.INCONCLUSIVE}[v]


def all_of(statuses) -> Status:
    statuses = list(statuses)
    if any(s is Status.FAILS for s in statuses):
        return Status.FAILS
    if any(s is Status.INCONCLUSIVE for s in statuses):
        return Status.INCONCLUSIVE
    return Status.HOLDS


def outcome_of(hyp: Status, concl: Status) -> Outcome:
    if hyp is not Status.HOLDS:
        return Outcome.VACUOUS
    return {Status.HOLDS: Outcome.PASS, Status.FAILS: Outcome.FAIL,
            Status.INCONCLUSIVE: Outcome.INCONCLUSIVE}[concl]


def _dec(x) -> float:
    return float(f"{float(x):.12g}")


@dataclass(frozen=True)
class Instance:
    space: PartialMetricSpace
    seq: object
    x: Fraction | None = None
    r: Fraction = Fraction(0)
    N: int = DEFAULT_N
    schedule: EpsSchedule = EpsSchedule()
    tau: Fraction = DEFAULT_TAU
    grid: Grid | tuple | None = None
    tail_fraction: Fraction = an.DEFAULT_TAIL_FRACTION
    seq2: object = None
    u: Fraction = Fraction(0)
    M_grid: tuple = (1, 2, 5, 10, 20, 50, 100)
    r_grid: tuple = (0, 1, 2)
    selection: IndexPredicate | None = None
    c: Fraction | None = None
    c_converse: Fraction | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.grid is not None and not isinstance(self.grid, Grid):
            object.__setattr__(self, "grid", tuple(an.grid_points(self.grid)))

    def describe(self) -> dict:
        d = {
            "space": self.space.describe(),
            "sequence": self.seq.describe(),
            "r": frac_text(self.r),
            "N": self.N,
            "schedule": [frac_text(e) for e in self.schedule],
            "tau": frac_text(self.tau),
            "tail_fraction": frac_text(self.tail_fraction),
        }
        if self.x is not None:
            d["x"] = _dec(self.x)
        if self.grid is not None:
            d["grid"] = (self.grid.to_dict() if isinstance(self.grid, Grid)
                         else [_dec(p) for p in self.grid])
        if self.seq2 is not None:
            d["sequence2"] = self.seq2.describe()
        if self.selection is not None:
            d["selection"] = self.selection.describe()
        if self.c is not None:
            d["c"] = _dec(self.c)
        if self.c_converse is not None:
            d["c_converse"] = _dec(self.c_converse)
        if self.seed is not None:
            d["seed"] = self.seed
        d["u"] = _dec(self.u)
        d["M_grid"] = [_dec(m) for m in self.M_grid]
        d["r_grid"] = [_dec(r) for r in self.r_grid]
        return d

    def digest(self) -> str:
        body = json.dumps(self.describe(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(body.encode()).hexdigest()[:16]


@dataclass
class CheckReport:
    theorem_id: str
    instance: Instance
    hypothesis_status: Status
    conclusion_status: Status
    evidence: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def outcome(self) -> Outcome:
        return outcome_of(self.hypothesis_status, self.conclusion_status)

    def sort_key(self):
        return (self.theorem_id, self.instance.digest())

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem_id,
            "instance": self.instance.describe(),
            "instance_hash": self.instance.digest(),
            "hypothesis": self.hypothesis_status.value,
            "conclusion": self.conclusion_status.value,
            "outcome": self.outcome.value,
            "evidence": self.evidence,
            "notes": list(self.notes),
        }


def _need(inst: Instance, *names):
    for name in names:
        if getattr(inst, name) is None:
            raise RejectedInput(f"this check needs instance field {name!r}")


def _limit_set(inst: Instance, r=None, seq=None, grid=None):
    return an.stat_limit_set(inst.space, seq or inst.seq, inst.r if r is None else r,
                             grid if grid is not None else inst.grid, inst.N,
                             inst.schedule, inst.tau)


def _rough_stat(inst: Instance, seq, x, r):
    return an.rough_stat_convergent(inst.space, seq, x, r, inst.schedule, inst.N, inst.tau)


def _constant_self_distance(inst: Instance) -> tuple[Status, float | None, list]:
    a = inst.space.constant_self_distance
    if a is None:
        return Status.FAILS, None, ["self-distance is not constant on this space"]
    sample = an.grid_points(inst.grid) if inst.grid is not None else [Fraction(0)]
    if any(abs(inst.space(y, y) - a) > DELTA for y in sample):
        return Status.FAILS, a, ["sampled self-distances differ"]
    if a <= 0:
        return Status.FAILS, a, ["constant self-distance must be positive"]
    return Status.HOLDS, a, []


# ---------------------------------------------------------------------------
# checks

def check_rough_implies_rough_stat(inst: Instance) -> CheckReport:
    """Rough convergence implies rough statistical convergence."""
    _need(inst, "x")
    hyp = an.rough_convergent(inst.space, inst.seq, inst.x, inst.r, inst.N,
                              inst.tail_fraction, inst.schedule)
    concl = _rough_stat(inst, inst.seq, inst.x, inst.r)
    return CheckReport("2.1", inst, status_of(hyp.verdict), status_of(concl.verdict),
                       {"rough": hyp.to_dict(), "rough_stat": concl.to_dict()})


def check_diam_bound(inst: Instance) -> CheckReport:
    """Constant self-distance a bounds the limit-set diameter by 2r + 2a."""
    _need(inst, "grid")
    hyp, a, notes = _constant_self_distance(inst)
    if hyp is not Status.HOLDS:
        return CheckReport("2.2", inst, hyp, Status.INCONCLUSIVE, {}, notes)
    est = _limit_set(inst)
    members = est.members
    evidence = {"limit_set": est.to_dict()}
    if not members:
        notes.append("estimated limit set is empty")
        return CheckReport("2.2", inst, Status.FAILS, Status.INCONCLUSIVE, evidence, notes)
    diam = set_diameter(inst.space, members)
    bound = 2 * float(inst.r) + 2 * a
    evidence.update(diameter=_dec(diam), bound=_dec(bound))
    concl = Status.HOLDS if diam <= bound + DELTA else Status.FAILS
    return CheckReport("2.2", inst, Status.HOLDS, concl, evidence, notes)


def check_ball_inclusion(inst: Instance) -> CheckReport:
    """Equal-self-distance points of the closed r-ball around a statistical limit are r-limits."""
    _need(inst, "x", "grid")
    hyp = an.stat_convergent(inst.space, inst.seq, inst.x, inst.schedule, inst.N, inst.tau)
    pxx = inst.space(inst.x, inst.x)
    qualified = [y for y in an.grid_points(inst.grid)
                 if closed_ball_contains(inst.space, inst.x, inst.r, y)
                 and abs(inst.space(y, y) - pxx) <= DELTA]
    evidence = {"stat_limit": hyp.to_dict(), "qualified": [_dec(y) for y in qualified]}
    if not qualified:
        return CheckReport("2.3", inst, status_of(hyp.verdict), Status.HOLDS, evidence,
                           ["no grid point qualifies; inclusion holds trivially"])
    est = _limit_set(inst, grid=qualified)
    evidence["membership"] = est.to_dict()
    if est.nonmembers:
        concl = Status.FAILS
    elif est.inconclusive:
        concl = Status.INCONCLUSIVE
    else:
        concl = Status.HOLDS
    return CheckReport("2.3", inst, status_of(hyp.verdict), concl, evidence)


def check_limit_set_closed(inst: Instance) -> CheckReport:
    """Grid-refinement closure test of the estimated limit set.

    Every Yes-run is re-evaluated at half the grid step, one half-step beyond
    each end included.  A refined No point lying between two refined Yes
    points is a hole and fails the check.
    """
    _need(inst, "grid")
    if not isinstance(inst.grid, Grid):
        raise RejectedInput("the closedness check needs a lo/hi/step grid")
    est = _limit_set(inst)
    evidence = {"limit_set": est.to_dict()}
    if not est.members:
        hyp = Status.INCONCLUSIVE if est.inconclusive else Status.FAILS
        return CheckReport("cor-2.1", inst, hyp, Status.INCONCLUSIVE, evidence,
                           ["no member found; the sequence is not r-statistically convergent on this grid"])
    h = inst.grid.step / 2
    lo, hi = inst.grid.lo, inst.grid.hi
    holes, runs = [], []
    for a, b in est.intervals:
        pts = [p for p in (a - h + k * h for k in range(int((b - a) / h) + 3)) if lo <= p <= hi]
        refined = _limit_set(inst, grid=pts)
        verdicts = [v.verdict for v in refined.membership]
        yes_at = [i for i, v in enumerate(verdicts) if v is Verdict.YES]
        for i, v in enumerate(verdicts):
            if v is Verdict.NO and yes_at and yes_at[0] < i < yes_at[-1]:
                holes.append(_dec(refined.points[i]))
        runs.append({"run": [_dec(a), _dec(b)],
                     "refined": [[_dec(p), v.value] for p, v in zip(refined.points, verdicts)]})
    evidence.update(refinement_step=frac_text(h), runs=runs, holes=holes)
    concl = Status.FAILS if holes else Status.HOLDS
    return CheckReport("cor-2.1", inst, Status.HOLDS, concl, evidence)


def check_stat_bounded_iff_nonempty(inst: Instance) -> CheckReport:
    """Statistical boundedness iff some rough limit set is nonempty."""
    _need(inst, "grid")
    hyp, _, notes = _constant_self_distance(inst)
    bounded = an.stat_bounded(inst.space, inst.seq, inst.u, inst.M_grid, inst.N, inst.tau)
    sets = {r: _limit_set(inst, r=Fraction(r)) for r in inst.r_grid}
    witness_r = next((r for r, est in sets.items() if est.members), None)
    undecided = any(est.inconclusive for est in sets.values())

    b = bounded.verdict
    if b is Verdict.NO:
        forward = Status.HOLDS
    elif b is Verdict.YES:
        forward = (Status.HOLDS if witness_r is not None
                   else Status.INCONCLUSIVE if undecided else Status.FAILS)
    else:
        forward = Status.INCONCLUSIVE

    if witness_r is None:
        backward = Status.INCONCLUSIVE if undecided else Status.HOLDS
    else:
        backward = status_of(b)

    evidence = {
        "bounded": bounded.to_dict(),
        "nonempty_at_r": _dec(witness_r) if witness_r is not None else None,
        "limit_sets": {frac_text(Fraction(r)): est.to_dict() for r, est in sets.items()},
        "forward": forward.value,
        "backward": backward.value,
    }
    notes.append("the existential over r is bounded to the r grid")
    return CheckReport("2.5", inst, hyp, all_of([forward, backward]), evidence, notes)


def check_density_one_subsequence(inst: Instance) -> CheckReport:
    """A density-one subsequence keeps every rough statistical limit."""
    _need(inst, "grid", "selection")
    est = density_estimate(inst.selection, inst.N)
    dv = density_verdict(est, inst.tau)
    if dv.verdict is DensityKind.POSITIVE:
        hyp = Status.HOLDS if est.value >= 1 - inst.tau else Status.FAILS
    elif dv.verdict is DensityKind.ZERO:
        hyp = Status.FAILS
    else:
        hyp = Status.INCONCLUSIVE
    evidence = {"selection_density": dv.to_dict()}
    if hyp is not Status.HOLDS:
        return CheckReport("2.6", inst, hyp, Status.INCONCLUSIVE, evidence,
                           ["selection density is not compatible with 1"])
    full = _limit_set(inst)
    evidence["full"] = full.to_dict()
    if not full.members:
        return CheckReport("2.6", inst, hyp, Status.HOLDS, evidence,
                           ["full limit set is empty; inclusion holds trivially"])
    sub = restrict_for_length(inst.seq, inst.selection, inst.N)
    sub_est = _limit_set(inst, seq=sub, grid=full.members)
    evidence["subsequence"] = sub_est.to_dict()
    concl = Status.FAILS if sub_est.nonmembers else Status.HOLDS
    notes = []
    if sub_est.inconclusive:
        notes.append("some full-sequence members are inconclusive for the subsequence")
    return CheckReport("2.6", inst, hyp, concl, evidence, notes)


def _pair_directions(inst: Instance, hyp_extra: Callable, concl_r: Callable, theorem_id: str,
                     notes=()) -> CheckReport:
    _need(inst, "x", "seq2")
    X, Y = inst.seq, inst.seq2
    xs, ys = X.values(inst.N), Y.values(inst.N)
    paired = an.values_tend_to(inst.space.pairwise(xs, ys), 0, inst.N, inst.tail_fraction,
                               inst.schedule)
    directions = []
    for name, src, dst, src_vals in (("forward", X, Y, xs), ("converse", Y, X, ys)):
        extra_status, extra_ev = hyp_extra(name, src_vals)
        src_conv = _rough_stat(inst, src, inst.x, inst.r)
        hyp = all_of([status_of(paired.verdict), extra_status, status_of(src_conv.verdict)])
        r_out = concl_r(name)
        dst_conv = _rough_stat(inst, dst, inst.x, r_out)
        directions.append((name, hyp, status_of(dst_conv.verdict), {
            "hypothesis": hyp.value, "self_distance": extra_ev,
            "source_rough_stat": src_conv.to_dict(),
            "conclusion_r": frac_text(r_out), "target_rough_stat": dst_conv.to_dict(),
        }))
    held = [d for d in directions if d[1] is Status.HOLDS]
    if held:
        hyp, concl = Status.HOLDS, all_of(d[2] for d in held)
    else:
        hyps = [d[1] for d in directions]
        hyp = Status.FAILS if all(h is Status.FAILS for h in hyps) else Status.INCONCLUSIVE
        concl = directions[0][2]
    evidence = {"paired_distance": paired.to_dict(), **{d[0]: d[3] for d in directions}}
    return CheckReport(theorem_id, inst, hyp, concl, evidence, list(notes))


def check_asymptotic_pair_transfer(inst: Instance) -> CheckReport:
    """Asymptotically close sequences with vanishing self-distance share r-limits."""
    def extra(_, vals):
        v = an.values_tend_to(inst.space.pairwise(vals, vals), 0, inst.N, inst.tail_fraction,
                              inst.schedule)
        return status_of(v.verdict), v.to_dict()
    return _pair_directions(inst, extra, lambda _: inst.r, "2.7")


def check_bounded_self_distance_transfer(inst: Instance) -> CheckReport:
    """Self-distance bounded by c transfers r-limits at roughness r + c."""
    _need(inst, "c")
    bounds = {"forward": Fraction(inst.c),
              "converse": Fraction(inst.c if inst.c_converse is None else inst.c_converse)}

    def extra(name, vals):
        worst = float(np.max(inst.space.pairwise(vals, vals)))
        ok = worst <= float(bounds[name]) + DELTA
        return (Status.HOLDS if ok else Status.FAILS), {"max": _dec(worst), "bound": _dec(bounds[name])}

    note = ("by the small-self-distance axiom, p(x_n, x_n) <= p(x_n, y_n), so the paired-distance "
            "hypothesis already forces vanishing self-distance")
    return _pair_directions(inst, extra, lambda name: inst.r + bounds[name], "2.8", [note])


def check_cluster_ball_containment(inst: Instance) -> CheckReport:
    """With constant self-distance, the r-limit set sits in the closed r-ball of a cluster point."""
    _need(inst, "grid", "c")
    const, _, notes = _constant_self_distance(inst)
    cl = an.stat_cluster_points(inst.space, inst.seq, [inst.c], inst.schedule, inst.N, inst.tau)
    kind = cl.verdicts[0]
    cluster_status = {an.ClusterKind.CLUSTER: Status.HOLDS, an.ClusterKind.NOT: Status.FAILS,
                      an.ClusterKind.INCONCLUSIVE: Status.INCONCLUSIVE}[kind]
    hyp = all_of([const, cluster_status])
    evidence = {"cluster": cl.to_dict()}
    if hyp is not Status.HOLDS:
        return CheckReport("2.9", inst, hyp, Status.INCONCLUSIVE, evidence, notes)
    est = _limit_set(inst)
    outside = [y for y in est.members if not closed_ball_contains(inst.space, inst.c, inst.r, y)]
    evidence.update(limit_set=est.to_dict(), outside_ball=[_dec(y) for y in outside])
    concl = Status.FAILS if outside else Status.HOLDS
    return CheckReport("2.9", inst, hyp, concl, evidence, notes)


CHECKS: dict[str, Callable[[Instance], CheckReport]] = {
    "2.1": check_rough_implies_rough_stat,
    "2.2": check_diam_bound,
    "2.3": check_ball_inclusion,
    "cor-2.1": check_limit_set_closed,
    "2.5": check_stat_bounded_iff_nonempty,
    "2.6": check_density_one_subsequence,
    "2.7": check_asymptotic_pair_transfer,
    "2.8": check_bounded_self_distance_transfer,
    "2.9": check_cluster_ball_containment,
}


def run_check(theorem_id: str, inst: Instance) -> CheckReport:
    try:
        fn = CHECKS[theorem_id]
    except KeyError:
        raise RejectedInput(f"unknown theorem id {theorem_id!r}") from None
    return fn(inst)


# ---------------------------------------------------------------------------
# default and random instances

def default_instances(N: int = DEFAULT_N, tau=DEFAULT_TAU) -> dict[str, Instance]:
    """One built-in instance per check; ``N`` and ``tau`` override the defaults."""
    se = PartialMetricSpace.shifted_euclidean(1)
    mx = PartialMetricSpace.max_rplus()
    q = Fraction(1, 4)
    wide = Grid(-3, 3, q)
    ex = paper_example_sequence()
    base = dict(N=N, tau=Fraction(tau))
    return {
        "2.1": Instance(se, reciprocal(), x=Fraction(0), r=Fraction(0), **base),
        "2.2": Instance(se, alternating(1), r=Fraction(1), grid=wide, **base),
        "2.3": Instance(se, reciprocal(), x=Fraction(0), r=Fraction(1), grid=Grid(-2, 2, q), **base),
        "cor-2.1": Instance(mx, ex, r=Fraction(1), grid=Grid(0, 5, q), **base),
        "2.5": Instance(se, alternating(1), u=Fraction(0), r_grid=(0, 1, 2), grid=wide, **base),
        "2.6": Instance(mx, ex, r=Fraction(1), grid=Grid(0, 5, q), selection=Not(PerfectSquare()),
                        **base),
        "2.7": Instance(mx, reciprocal(), seq2=reciprocal(Fraction(1, 2)), x=Fraction(0),
                        r=Fraction(0), **base),
        "2.8": Instance(mx, reciprocal(), seq2=reciprocal(Fraction(1, 2)), x=Fraction(0),
                        r=Fraction(0), c=Fraction(1), **base),
        "2.9": Instance(se, alternating(1), c=Fraction(1), r=Fraction(1), grid=wide, **base),
    }


_QUARTERS = [Fraction(k, 4) for k in range(-8, 9)]


def _random_predicate(rng: random.Random) -> IndexPredicate:
    choice = rng.randrange(7)
    if choice == 0:
        return PerfectSquare()
    if choice == 1:
        return Even()
    if choice == 2:
        return Odd()
    if choice == 3:
        m = rng.choice([3, 4, 5])
        return Residue(m, rng.randrange(m))
    if choice == 4:
        return And((Even(), Not(PerfectSquare())))
    if choice == 5:
        return Residue(rng.choice([100, 150, 200]), rng.randrange(100))
    return Not(Residue(3, rng.randrange(3)))


def _random_bounded_rule(rng: random.Random):
    choice = rng.randrange(3)
    if choice == 0:
        return Const(rng.choice(_QUARTERS))
    if choice == 1:
        return Reciprocal(rng.choice([Fraction(1), Fraction(1, 2), Fraction(2)]))
    return Alternating(rng.choice([Fraction(1, 2), Fraction(1), Fraction(3, 2)]))


def random_sequence(rng: random.Random) -> SequenceSpec:
    pieces = [(_random_predicate(rng), _random_bounded_rule(rng)) for _ in range(rng.randrange(3))]
    pieces.append((All(), rng.choice([Const(rng.choice(_QUARTERS)), _random_bounded_rule(rng)])))
    return SequenceSpec(tuple(pieces))


def random_instance(seed: int, N: int = 10_000, tau=DEFAULT_TAU) -> Instance:
    """Seeded shifted-Euclidean instance with a bounded piecewise sequence."""
    rng = random.Random(seed)
    a = rng.choice([Fraction(1, 2), Fraction(1), Fraction(2)])
    seq = random_sequence(rng)
    consts = [rule.c for _, rule in seq.pieces if isinstance(rule, Const)]
    if consts and rng.random() < 0.5:
        x = rng.choice(consts)
    else:
        x = rng.choice(_QUARTERS)
    selection = rng.choice([Not(PerfectSquare()), All(), Not(Residue(200, rng.randrange(200)))])
    return Instance(
        PartialMetricSpace.shifted_euclidean(a), seq, x=x,
        r=rng.choice([Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)]),
        N=N, tau=Fraction(tau), grid=Grid(-3, 3, Fraction(1, 4)), selection=selection, seed=seed,
    )


RANDOMIZED_CHECKS = ("2.1", "2.2", "2.3", "2.6")


def run_suite(N: int = DEFAULT_N, tau=DEFAULT_TAU, seed: int = 0, random_count: int = 0,
              random_N: int = 10_000) -> list[CheckReport]:
    """Default instances for every check plus ``random_count`` seeded random ones."""
    reports = [run_check(tid, inst) for tid, inst in default_instances(N, tau).items()]
    for i in range(random_count):
        inst = random_instance(seed + i, min(N, random_N), tau)
        reports.extend(run_check(tid, inst) for tid in RANDOMIZED_CHECKS)
    return sorted(reports, key=CheckReport.sort_key)


__all__ = [
    "Status", "Outcome", "Instance", "CheckReport", "CHECKS", "RANDOMIZED_CHECKS", "run_check", "run_suite",
    "default_instances", "random_instance", "random_sequence", "outcome_of",
    "check_rough_implies_rough_stat", "check_diam_bound", "check_ball_inclusion",
    "check_limit_set_closed", "check_stat_bounded_iff_nonempty", "check_density_one_subsequence",
    "check_asymptotic_pair_transfer", "check_bounded_self_distance_transfer",
    "check_cluster_ball_containment",
]
