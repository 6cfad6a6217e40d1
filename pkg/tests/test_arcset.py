import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circlecover.arcset import ArcSet, circle_dist, mod1


def test_full_minus_arc_leaves_complement():
    got = ArcSet.full_circle().subtract(0.2, 0.3)
    assert len(got) == 1
    assert got.measure == pytest.approx(0.7, abs=1e-15)
    assert got.contains(0.2) and got.contains(0.5) and not got.contains(0.3)


def test_open_subtraction_leaves_closed_remnants():
    base = ArcSet.from_arcs([(0.0, 0.4)])
    got = base.subtract(0.1, 0.1)  # remove (0.1, 0.2)
    assert got.arcs() == [(0.0, pytest.approx(0.1)), (0.2, pytest.approx(0.2))]
    assert got.contains(0.1) and got.contains(0.2)


def test_subtract_disjoint_is_identity():
    base = ArcSet.from_arcs([(0.0, 0.2), (0.5, 0.1)])
    assert base.subtract(0.3, 0.1) == base


def test_endpoint_hit_leaves_point_arcs():
    base = ArcSet.from_arcs([(0.1, 0.2)])
    got = base.subtract(0.1, 0.2)  # open (0.1, 0.3) leaves both endpoints
    assert got.measure == 0.0
    assert got.only_points()
    assert len(got) == 2 and got.starts[0] == 0.1


def test_wraparound_subtraction():
    base = ArcSet.full_circle()
    got = base.subtract(0.75, 0.5)  # (0.75, 1.25) leaves [0.25, 0.75]
    assert got.measure == pytest.approx(0.5, abs=1e-15)
    assert got.contains(0.25) and got.contains(0.75) and not got.contains(0.8)
    assert not got.contains(0.0)


def test_canonicalization_merges_and_wraps():
    a = ArcSet.from_arcs([(0.8, 0.3), (0.05, 0.1)])  # [0.8,1.1] and [0.05,0.15]
    assert len(a) == 1
    assert a.measure == pytest.approx(0.35)
    b = ArcSet.from_arcs([(0.0, 0.5), (0.5, 0.5)])
    assert b.is_full()


def test_point_arcs_absorbed_by_overlapping_arcs():
    a = ArcSet.from_arcs([(0.2, 0.0), (0.1, 0.3)])
    assert a.arcs() == [(0.1, 0.3)]


arcs_strategy = st.lists(
    st.tuples(st.floats(0, 1, exclude_max=True, allow_nan=False),
              st.floats(0, 0.45, allow_nan=False)),
    min_size=1, max_size=6)


@given(arcs_strategy)
@settings(max_examples=200, deadline=None)
def test_canonicalization_idempotent(arcs):
    a = ArcSet.from_arcs(arcs)
    b = ArcSet.from_arcs(a.arcs())
    assert a == b


@given(arcs_strategy,
       st.floats(0, 1, exclude_max=True, allow_nan=False),
       st.floats(1e-9, 0.999, allow_nan=False))
@settings(max_examples=300, deadline=None)
def test_subtract_measure_accounting(arcs, lo, ln):
    a = ArcSet.from_arcs(arcs)
    overlap = a.overlap_measure(lo, ln)
    after = a.subtract(lo, ln)
    assert after.measure == pytest.approx(a.measure - overlap, abs=1e-12)


@given(arcs_strategy, arcs_strategy)
@settings(max_examples=200, deadline=None)
def test_union_intersection_inclusion_exclusion(arcs1, arcs2):
    a, b = ArcSet.from_arcs(arcs1), ArcSet.from_arcs(arcs2)
    u, i = a.union(b), a.intersect(b)
    assert u.measure == pytest.approx(a.measure + b.measure - i.measure, abs=1e-12)
    assert i.measure <= min(a.measure, b.measure) + 1e-12


@given(arcs_strategy, st.floats(-2, 2, allow_nan=False))
@settings(max_examples=100, deadline=None)
def test_translate_preserves_measure(arcs, off):
    a = ArcSet.from_arcs(arcs)
    assert a.translate(off).measure == pytest.approx(a.measure, abs=1e-12)


@given(arcs_strategy, st.floats(0, 1, exclude_max=True, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_contains_matches_linear_check(arcs, x):
    a = ArcSet.from_arcs(arcs)
    brute = any(s <= x <= s + ln or s <= x + 1.0 <= s + ln
                for s, ln in a.arcs())
    assert a.contains(x) == (brute or a.is_full())


def test_distance_and_mod():
    assert mod1(1.25) == 0.25
    assert mod1(-0.25) == 0.75
    assert circle_dist(0.1, 0.9) == pytest.approx(0.2)
    a = ArcSet.from_arcs([(0.4, 0.2)])
    assert a.distance(0.5) == 0.0
    assert a.distance(0.3) == pytest.approx(0.1)
    assert a.distance(0.9) == pytest.approx(0.3)


def test_subtract_set_difference():
    a = ArcSet.from_arcs([(0.0, 0.5)])
    b = ArcSet.from_arcs([(0.2, 0.1)])
    got = a.subtract_set(b)
    assert got.measure == pytest.approx(0.4, abs=1e-12)
    assert a.subtract_set(ArcSet.full_circle()).is_empty()
