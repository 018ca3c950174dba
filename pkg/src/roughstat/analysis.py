"""Verdict engines for rough and statistical convergence on finite prefixes.

Every "for every epsilon" is truncated to a finite decreasing schedule, and
every "d(B) = 0" is decided by :func:`density.density_verdict`.  Verdicts are
three-valued; a Yes always means "Yes for this schedule, N and tau".
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .density import (DEFAULT_N, DEFAULT_TAU, DensityKind, DensityVerdict, check_tau,
                      density_verdict, estimate_from_counts, frac_text)
from .errors import RejectedInput
from .pm_core import DELTA, PartialMetricSpace, as_point
from .seq_spec import Explicit

DEFAULT_SCHEDULE = (Fraction(1), Fraction(1, 2), Fraction(1, 10), Fraction(1, 20), Fraction(1, 100))
DEFAULT_TAIL_FRACTION = Fraction(1, 2)


class Verdict(str, Enum):
    YES = "Yes"
    NO = "No"
    INCONCLUSIVE = "Inconclusive"


class Mode(str, Enum):
    ROUGH_STAT = "RoughStat"
    STAT = "Stat"
    ROUGH = "Rough"
    STAT_CAUCHY = "StatCauchy"
    STAT_BOUNDED = "StatBounded"


class ClusterKind(str, Enum):
    CLUSTER = "cluster"
    NOT = "not"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EpsSchedule:
    values: tuple = DEFAULT_SCHEDULE

    def __post_init__(self):
        vals = tuple(Fraction(v) for v in self.values)
        if not vals:
            raise RejectedInput("epsilon schedule must be nonempty")
        if any(v <= 0 for v in vals):
            raise RejectedInput("epsilon schedule entries must be positive")
        if any(b >= a for a, b in zip(vals, vals[1:])):
            raise RejectedInput("schedule must be strictly decreasing")
        object.__setattr__(self, "values", vals)

    @property
    def smallest(self) -> Fraction:
        return self.values[-1]

    @property
    def largest(self) -> Fraction:
        return self.values[0]

    def __iter__(self):
        return iter(self.values)


def as_schedule(schedule) -> EpsSchedule:
    if schedule is None:
        return EpsSchedule()
    return schedule if isinstance(schedule, EpsSchedule) else EpsSchedule(tuple(schedule))


@dataclass(frozen=True)
class Grid:
    """Arithmetic grid ``lo, lo + step, ...`` up to and including ``hi``."""
    lo: Fraction
    hi: Fraction
    step: Fraction

    def __post_init__(self):
        for name in ("lo", "hi", "step"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.step <= 0:
            raise RejectedInput("grid step must be positive")
        if self.hi < self.lo:
            raise RejectedInput("grid hi must not be below lo")

    def points(self) -> list[Fraction]:
        count = math.floor((self.hi - self.lo) / self.step)
        return [self.lo + k * self.step for k in range(count + 1)]

    def to_dict(self) -> dict:
        return {"lo": float(self.lo), "hi": float(self.hi), "step": frac_text(self.step)}


def grid_points(grid) -> list[Fraction]:
    """Sorted, de-duplicated candidate points from a Grid or an iterable."""
    pts = grid.points() if isinstance(grid, Grid) else [Fraction(p) for p in grid]
    return sorted(set(pts))


@dataclass
class ConvergenceVerdict:
    verdict: Verdict
    mode: Mode
    # (parameter, DensityVerdict); the parameter is epsilon, or M for boundedness
    per_eps: list = field(default_factory=list)
    detail: dict = field(default_factory=dict)

    @property
    def yes(self) -> bool:
        return self.verdict is Verdict.YES

    def worst(self):
        """The schedule entry with the largest density, or None."""
        if not self.per_eps:
            return None
        best = self.per_eps[0]
        for item in self.per_eps[1:]:
            if item[1].evidence.value > best[1].evidence.value:
                best = item
        return best

    def to_dict(self) -> dict:
        d = {"verdict": self.verdict.value, "mode": self.mode.value}
        if self.per_eps:
            key = "M" if self.mode is Mode.STAT_BOUNDED else "eps"
            d["per_eps"] = [{key: frac_text(e), **dv.to_dict()} for e, dv in self.per_eps]
        if self.detail:
            d["detail"] = self.detail
        return d


def _aggregate(per_eps) -> Verdict:
    kinds = [dv.verdict for _, dv in per_eps]
    if all(k is DensityKind.ZERO for k in kinds):
        return Verdict.YES
    if any(k is DensityKind.POSITIVE for k in kinds):
        return Verdict.NO
    return Verdict.INCONCLUSIVE


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ROUGHSTAT_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn: Callable, items: Sequence) -> list:
    n = _threads()
    if n <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _check_N(N: int) -> int:
    N = int(N)
    if N < 2:
        raise RejectedInput("prefix length N must be >= 2")
    return N


def _distances(space: PartialMetricSpace, values: np.ndarray, x) -> np.ndarray:
    """``|p(x_n, x) - p(x, x)|`` for every term."""
    x = as_point(x)
    return np.abs(space.eval_many(values, x) - space(x, x))


def _count_verdict(mask: np.ndarray, N: int, tau) -> DensityVerdict:
    est = estimate_from_counts(int(np.count_nonzero(mask)),
                               int(np.count_nonzero(mask[: N // 2])), N)
    return density_verdict(est, tau)


def _rough_stat_from_distances(d: np.ndarray, r, schedule: EpsSchedule, N: int, tau,
                               mode=Mode.ROUGH_STAT) -> ConvergenceVerdict:
    r = Fraction(r)
    per_eps = []
    for eps in schedule:
        mask = d >= float(r + eps) - DELTA
        per_eps.append((eps, _count_verdict(mask, N, tau)))
    return ConvergenceVerdict(_aggregate(per_eps), mode, per_eps)


def _check_r(r) -> Fraction:
    r = Fraction(r)
    if r < 0:
        raise RejectedInput("roughness degree must be nonnegative")
    return r


# ---------------------------------------------------------------------------
# single-candidate engines

def exceedance_indices(space, seq, x, r, eps, N) -> Explicit:
    """Indices ``n <= N`` with ``|p(x_n, x) - p(x, x)| >= r + eps`` (ties included)."""
    r, eps = _check_r(r), Fraction(eps)
    if eps <= 0:
        raise RejectedInput("epsilon must be positive")
    if N < 1:
        raise RejectedInput("N must be >= 1")
    d = _distances(space, seq.values(int(N)), x)
    return Explicit(np.flatnonzero(d >= float(r + eps) - DELTA) + 1)


def rough_stat_convergent(space, seq, x, r, schedule=None, N=DEFAULT_N,
                          tau=DEFAULT_TAU) -> ConvergenceVerdict:
    N, r, tau = _check_N(N), _check_r(r), check_tau(tau)
    d = _distances(space, seq.values(N), x)
    return _rough_stat_from_distances(d, r, as_schedule(schedule), N, tau)


def stat_convergent(space, seq, x, schedule=None, N=DEFAULT_N, tau=DEFAULT_TAU) -> ConvergenceVerdict:
    v = rough_stat_convergent(space, seq, x, 0, schedule, N, tau)
    v.mode = Mode.STAT
    return v


def _tail_window(N: int, tail_fraction) -> tuple[int, int, int]:
    tf = Fraction(tail_fraction)
    if not 0 < tf < 1:
        raise RejectedInput("tail_fraction must lie strictly between 0 and 1")
    start = max(1, math.ceil(N * tf))
    if N - start + 1 < 2:
        raise RejectedInput("tail window is too short")
    mid = start + (N - start + 1) // 2
    return start, mid, N


def tail_verdict(d: np.ndarray, r, N: int, tail_fraction=DEFAULT_TAIL_FRACTION,
                 schedule=None) -> ConvergenceVerdict:
    """Decide ``limsup d_n <= r`` from the window ``[ceil(N*tf), N]``.

    Yes needs the window sup strictly below ``r + eps_min`` and the second
    half of the window not rising above the first by more than ``eps_min/10``;
    No needs both halves to exceed ``r + eps_max``.
    """
    schedule = as_schedule(schedule)
    r = _check_r(r)
    start, mid, end = _tail_window(N, tail_fraction)
    first = float(np.max(d[start - 1: mid - 1]))
    second = float(np.max(d[mid - 1: end]))
    tail_sup = max(first, second)
    lo_bar = float(r + schedule.smallest)
    hi_bar = float(r + schedule.largest)
    if tail_sup < lo_bar - DELTA and second <= first + float(schedule.smallest) / 10 + DELTA:
        verdict = Verdict.YES
    elif first > hi_bar + DELTA and second > hi_bar + DELTA:
        verdict = Verdict.NO
    else:
        verdict = Verdict.INCONCLUSIVE
    detail = {"window": [start, end], "tail_sup": float(f"{tail_sup:.12g}"),
              "first_half_sup": float(f"{first:.12g}"), "second_half_sup": float(f"{second:.12g}")}
    return ConvergenceVerdict(verdict, Mode.ROUGH, [], detail)


def rough_convergent(space, seq, x, r, N=DEFAULT_N, tail_fraction=DEFAULT_TAIL_FRACTION,
                     schedule=None) -> ConvergenceVerdict:
    N = _check_N(N)
    d = _distances(space, seq.values(N), x)
    return tail_verdict(d, r, N, tail_fraction, schedule)


def values_tend_to(values: np.ndarray, target, N: int, tail_fraction=DEFAULT_TAIL_FRACTION,
                   schedule=None) -> ConvergenceVerdict:
    """Ordinary convergence of a real sequence to ``target`` (r = 0 tail test)."""
    d = np.abs(np.asarray(values[:N], dtype=float) - float(target))
    return tail_verdict(d, 0, N, tail_fraction, schedule)


# ---------------------------------------------------------------------------
# limit sets

@dataclass
class LimitSetEstimate:
    r: Fraction
    points: list
    membership: list
    grid: Grid | None = None

    @property
    def members(self) -> list:
        return [p for p, v in zip(self.points, self.membership) if v.verdict is Verdict.YES]

    @property
    def nonmembers(self) -> list:
        return [p for p, v in zip(self.points, self.membership) if v.verdict is Verdict.NO]

    @property
    def inconclusive(self) -> list:
        return [p for p, v in zip(self.points, self.membership)
                if v.verdict is Verdict.INCONCLUSIVE]

    @property
    def intervals(self) -> list[tuple]:
        """Maximal runs of consecutive Yes points as closed intervals."""
        runs, start, prev = [], None, None
        for p, v in zip(self.points, self.membership):
            if v.verdict is Verdict.YES:
                if start is None:
                    start = p
                prev = p
            elif start is not None:
                runs.append((start, prev))
                start = None
        if start is not None:
            runs.append((start, prev))
        return runs

    def verdict_at(self, point) -> Verdict:
        return self.membership[self.points.index(Fraction(point))].verdict

    def to_dict(self) -> dict:
        return {
            "r": frac_text(self.r),
            "grid": self.grid.to_dict() if self.grid else None,
            "intervals": [[float(a), float(b)] for a, b in self.intervals],
            "members": [float(p) for p in self.members],
            "nonmembers": [float(p) for p in self.nonmembers],
            "inconclusive": [float(p) for p in self.inconclusive],
        }


def expand_intervals(intervals: Iterable[tuple], points: Sequence) -> list:
    """Grid points covered by ``intervals``; inverse of interval compression."""
    return [p for p in points if any(a <= p <= b for a, b in intervals)]


def stat_limit_set(space, seq, r, grid, N=DEFAULT_N, schedule=None,
                   tau=DEFAULT_TAU) -> LimitSetEstimate:
    N, r, tau = _check_N(N), _check_r(r), check_tau(tau)
    schedule = as_schedule(schedule)
    pts = grid_points(grid)
    if not pts:
        raise RejectedInput("grid has no points")
    values = seq.values(N)
    membership = _pmap(
        lambda p: _rough_stat_from_distances(_distances(space, values, p), r, schedule, N, tau),
        pts)
    return LimitSetEstimate(r, pts, membership, grid if isinstance(grid, Grid) else None)


def rough_limit_set(space, seq, r, grid, N=DEFAULT_N, tail_fraction=DEFAULT_TAIL_FRACTION,
                    schedule=None) -> LimitSetEstimate:
    N, r = _check_N(N), _check_r(r)
    pts = grid_points(grid)
    if not pts:
        raise RejectedInput("grid has no points")
    values = seq.values(N)
    membership = _pmap(
        lambda p: tail_verdict(_distances(space, values, p), r, N, tail_fraction, schedule), pts)
    return LimitSetEstimate(r, pts, membership, grid if isinstance(grid, Grid) else None)


# ---------------------------------------------------------------------------
# boundedness, Cauchy, cluster points

def stat_bounded(space, seq, u, M_grid, N=DEFAULT_N, tau=DEFAULT_TAU) -> ConvergenceVerdict:
    """Search ``M_grid`` for a bound M with ``d({n : p(x_n, u) >= M}) = 0``."""
    N, tau = _check_N(N), check_tau(tau)
    Ms = [Fraction(m) for m in M_grid]
    if not Ms or any(m <= 0 for m in Ms) or any(b <= a for a, b in zip(Ms, Ms[1:])):
        raise RejectedInput("M grid must be a nonempty increasing list of positive reals")
    dist = space.eval_many(seq.values(N), as_point(u))
    per_M = [(M, _count_verdict(dist >= float(M) - DELTA, N, tau)) for M in Ms]
    witness = next((M for M, dv in per_M if dv.verdict is DensityKind.ZERO), None)
    if witness is not None:
        verdict = Verdict.YES
    elif per_M[-1][1].verdict is DensityKind.POSITIVE:
        verdict = Verdict.NO
    else:
        verdict = Verdict.INCONCLUSIVE
    detail = {"u": float(u), "M": frac_text(witness) if witness is not None else None}
    return ConvergenceVerdict(verdict, Mode.STAT_BOUNDED, per_M, detail)


def stat_cauchy(space, seq, m_candidates, l_grid, schedule=None, N=DEFAULT_N,
                tau=DEFAULT_TAU) -> ConvergenceVerdict:
    """Bounded search for a witness pair (m, l)."""
    N, tau = _check_N(N), check_tau(tau)
    schedule = as_schedule(schedule)
    ms = [int(m) for m in m_candidates]
    ls = [Fraction(l) for l in l_grid]
    if not ms or not ls:
        raise RejectedInput("m candidates and l grid must be nonempty")
    if any(m < 1 for m in ms) or any(l < 0 for l in ls):
        raise RejectedInput("m must be positive and l nonnegative")
    values = seq.values(max(N, max(ms)))
    pairs, all_no, first_no = [], True, None
    for m in ms:
        base = space.eval_many(values[:N], float(values[m - 1]))
        for l in ls:
            d = np.abs(base - float(l))
            v = _rough_stat_from_distances(d, 0, schedule, N, tau, Mode.STAT_CAUCHY)
            pairs.append({"m": m, "l": frac_text(l), "verdict": v.verdict.value})
            if v.verdict is Verdict.YES:
                v.detail = {"witness": {"m": m, "l": frac_text(l)}, "pairs": pairs}
                return v
            if v.verdict is Verdict.NO:
                first_no = first_no or v
            else:
                all_no = False
    if all_no:
        out = first_no
        out.verdict = Verdict.NO
    else:
        out = ConvergenceVerdict(Verdict.INCONCLUSIVE, Mode.STAT_CAUCHY, [])
    out.detail = {"witness": None, "pairs": pairs}
    return out


@dataclass
class ClusterReport:
    points: list
    per_point: list   # list of [(eps, DensityVerdict)]
    verdicts: list    # ClusterKind per point

    @property
    def clusters(self) -> list:
        return [p for p, k in zip(self.points, self.verdicts) if k is ClusterKind.CLUSTER]

    def verdict_at(self, point) -> ClusterKind:
        return self.verdicts[self.points.index(Fraction(point))]

    def to_dict(self) -> dict:
        return {
            "reading": "forall-eps",
            "points": [
                {"c": float(p), "verdict": k.value,
                 "per_eps": [{"eps": frac_text(e), **dv.to_dict()} for e, dv in ev]}
                for p, ev, k in zip(self.points, self.per_point, self.verdicts)
            ],
        }


def _cluster_kind(per_eps) -> ClusterKind:
    kinds = [dv.verdict for _, dv in per_eps]
    if all(k is DensityKind.POSITIVE for k in kinds):
        return ClusterKind.CLUSTER
    if any(k is DensityKind.ZERO for k in kinds):
        return ClusterKind.NOT
    return ClusterKind.INCONCLUSIVE


def stat_cluster_points(space, seq, grid, schedule=None, N=DEFAULT_N,
                        tau=DEFAULT_TAU) -> ClusterReport:
    """Near-sets ``{n : |p(x_n, c) - p(c, c)| < eps}`` must be Positive at every eps."""
    N, tau = _check_N(N), check_tau(tau)
    schedule = as_schedule(schedule)
    pts = grid_points(grid)
    if not pts:
        raise RejectedInput("grid has no points")
    values = seq.values(N)

    def one(c):
        d = _distances(space, values, c)
        return [(eps, _count_verdict(d < float(eps) - DELTA, N, tau)) for eps in schedule]

    per_point = _pmap(one, pts)
    return ClusterReport(pts, per_point, [_cluster_kind(ev) for ev in per_point])
