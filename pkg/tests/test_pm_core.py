import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roughstat.errors import DomainError, RejectedInput
from roughstat.pm_core import (
    PartialMetricSpace,
    SpaceKind,
    axiom_check,
    closed_ball_contains,
    open_ball_contains,
    parse_space,
    set_diameter,
)

MAX = PartialMetricSpace.max_rplus()
SE1 = PartialMetricSpace.shifted_euclidean(1)

nonneg = st.integers(0, 400).map(lambda k: k / 8)
reals = st.integers(-400, 400).map(lambda k: k / 8)
radii = st.integers(0, 40).map(lambda k: k / 4)


# -- evaluation -------------------------------------------------------------

@pytest.mark.parametrize("space,x,y,expected", [
    (MAX, 3, 5, 5),
    (MAX, 2, 2, 2),
    (SE1, 0, 0, 1),
    (SE1, -1, 2, 4),
    (PartialMetricSpace.shifted_euclidean(0.5), 1, 1, 0.5),
])
def test_eval_examples(space, x, y, expected):
    assert space(x, y) == expected


def test_max_rejects_negative_point():
    with pytest.raises(DomainError):
        MAX(-1, 2)
    with pytest.raises(RejectedInput):
        MAX(2, -0.5)


def test_non_finite_point_rejected():
    with pytest.raises(RejectedInput):
        SE1(math.nan, 0)
    with pytest.raises(RejectedInput):
        SE1(0, math.inf)


def test_shifted_euclidean_needs_nonnegative_a():
    with pytest.raises(RejectedInput):
        PartialMetricSpace.shifted_euclidean(-1)


def test_constant_self_distance():
    assert SE1.constant_self_distance == 1
    assert MAX.constant_self_distance is None


def test_parse_space():
    assert parse_space("max_rplus").kind is SpaceKind.MAX_RPLUS
    s = parse_space("shifted_euclidean", "1/2")
    assert s.kind is SpaceKind.SHIFTED_EUCLIDEAN and s.constant_self_distance == 0.5
    with pytest.raises(RejectedInput):
        parse_space("shifted_euclidean")
    with pytest.raises(RejectedInput):
        parse_space("max_rplus", "1")
    with pytest.raises(RejectedInput):
        parse_space("taxicab")


# -- axiom checker ------------------------------------------------------------

def test_axioms_max_small_sample():
    assert axiom_check(MAX, [0, 1, 2, 3]).violations == []


def test_axioms_shifted_small_sample():
    assert axiom_check(SE1, [-1, 0, 2]).violations == []


def test_min_rule_single_p1_violation():
    report = axiom_check(lambda x, y: min(x, y), [1, 2])
    p1 = [v for v in report.violations if v.axiom == "p1"]
    assert len(p1) == 1
    v = p1[0]
    assert v.axiom == "p1"
    assert tuple(v.witness) == (2, 1)
    assert (v.lhs, v.rhs) == (2, 1)


def test_min_rule_triangle_violations_are_genuine():
    # p(1,1) = 1 > p(1,2) + p(2,1) - p(2,2) = 0
    report = axiom_check(lambda x, y: min(x, y), [1, 2])
    p4 = {tuple(v.witness) for v in report.violations if v.axiom == "p4"}
    assert (1, 1, 2) in p4
    for x, y, z in p4:
        q = min
        assert q(x, y) > q(x, z) + q(z, y) - q(z, z)


def test_nan_rule_is_reported():
    report = axiom_check(lambda x, y: math.nan, [0, 1])
    assert not report.ok


def test_triangle_violation_detected():
    # |x - y|^2 breaks the modified triangle inequality
    report = axiom_check(lambda x, y: (x - y) ** 2, [0, 1, 2])
    assert {v.axiom for v in report.violations} == {"p4"}


@settings(max_examples=60, deadline=None)
@given(st.lists(nonneg, min_size=1, max_size=12))
def test_max_axioms_hold_on_random_samples(sample):
    assert axiom_check(MAX, sample).ok


@settings(max_examples=60, deadline=None)
@given(st.lists(reals, min_size=1, max_size=12), st.sampled_from([0, 0.5, 1, 2]))
def test_shifted_axioms_hold_on_random_samples(sample, a):
    assert axiom_check(PartialMetricSpace.shifted_euclidean(a), sample).ok


# -- properties -----------------------------------------------------------------

@given(nonneg, nonneg)
def test_symmetry_max(x, y):
    assert MAX(x, y) == MAX(y, x)


@given(reals, reals)
def test_symmetry_shifted(x, y):
    assert SE1(x, y) == SE1(y, x)


@given(nonneg, nonneg)
def test_small_self_distance_max(x, y):
    assert MAX(x, x) <= MAX(x, y)


@given(reals, reals)
def test_small_self_distance_shifted(x, y):
    assert SE1(x, x) <= SE1(x, y)


@given(reals, radii, radii, reals)
def test_closed_ball_monotone_in_radius(c, r1, r2, y):
    lo, hi = sorted((r1, r2))
    if closed_ball_contains(SE1, c, lo, y):
        assert closed_ball_contains(SE1, c, hi, y)


@given(nonneg, radii, radii, nonneg)
def test_closed_ball_monotone_in_radius_max(c, r1, r2, y):
    lo, hi = sorted((r1, r2))
    if closed_ball_contains(MAX, c, lo, y):
        assert closed_ball_contains(MAX, c, hi, y)


@given(st.lists(reals, min_size=1, max_size=8), st.lists(reals, max_size=4))
def test_diameter_monotone_under_inclusion(base, extra):
    assert set_diameter(SE1, base) <= set_diameter(SE1, base + extra)


@given(st.lists(nonneg, min_size=1, max_size=8), st.lists(nonneg, max_size=4))
def test_diameter_monotone_under_inclusion_max(base, extra):
    assert set_diameter(MAX, base) <= set_diameter(MAX, base + extra)


# -- balls and diameter examples --------------------------------------------------

def test_ball_examples():
    assert closed_ball_contains(MAX, 2, 1, 3)
    assert not closed_ball_contains(MAX, 2, 1, 3.5)
    assert closed_ball_contains(SE1, 0, 1, -1)
    # boundary belongs to the closed ball only
    assert not open_ball_contains(SE1, 0, 1, -1)
    assert open_ball_contains(SE1, 0, 1, -0.5)


def test_ball_rejects_negative_radius():
    with pytest.raises(RejectedInput):
        closed_ball_contains(SE1, 0, -1, 0)
    with pytest.raises(RejectedInput):
        open_ball_contains(SE1, 0, -1, 0)


def test_diameter_examples():
    assert set_diameter(MAX, [1, 3]) == 3
    assert set_diameter(SE1, [0]) == 1
    assert set_diameter(SE1, [-1, 1]) == 3


def test_diameter_brute_force():
    pts = [-2, -0.5, 0, 1.25, 3]
    expected = max(abs(x - y) + 1 for x, y in itertools.product(pts, repeat=2))
    assert set_diameter(SE1, pts) == expected


def test_diameter_of_empty_set_rejected():
    with pytest.raises(RejectedInput):
        set_diameter(SE1, [])
