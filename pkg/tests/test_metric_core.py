import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jungck.metric_core import (
    EuclideanDomain,
    FiniteMetricSpace,
    MetricAxiomError,
    MetricStructureError,
    distance,
    random_planar_space,
    validate_metric,
)

from .oracles import triangle_oracle


def test_two_point_space_is_valid():
    assert validate_metric([[0, 1], [1, 0]]) == []


def test_asymmetry_reported_once():
    v = validate_metric([[0, 1], [2, 0]])
    assert len(v) == 1
    assert v[0].axiom == "symmetry" and v[0].indices == (0, 1) and v[0].amount == 1.0


def test_triangle_violation_matches_triple_loop():
    d = [[0, 1, 3], [1, 0, 1], [3, 1, 0]]
    # brute force sees both orientations of the same endpoints: (0,1,2) and (2,1,0)
    raw = triangle_oracle(d)
    assert sorted(raw) == [(0, 1, 2), (2, 1, 0)]
    v = validate_metric(d)
    assert len(v) == 1
    assert v[0].axiom == "triangle" and v[0].amount == 1.0
    assert {v[0].indices[0], v[0].indices[2]} == {0, 2} and v[0].indices[1] == 1


def test_duplicate_points_rejected():
    v = validate_metric([[0, 0], [0, 0]])
    assert {x.axiom for x in v} == {"identity"}
    with pytest.raises(MetricAxiomError):
        FiniteMetricSpace([[0, 0], [0, 0]])


def test_nonzero_diagonal():
    v = validate_metric([[0.5, 1], [1, 0]])
    assert [x.axiom for x in v] == ["identity"]


@pytest.mark.parametrize("bad", [[[0, 1]], [[0, 1], [1]], [[0, float("nan")], [1, 0]], [], [["a", 1], [1, 0]]])
def test_structural_errors_are_distinct(bad):
    with pytest.raises(MetricStructureError):
        validate_metric(bad)


def test_finite_distance_lookup():
    space = FiniteMetricSpace([[0, 1], [1, 0]], ["a", "b"])
    assert distance(space, 0, 1) == 1
    assert distance(space, 1, 1) == 0
    assert space.index_of("b") == 1


def test_interval_distance():
    dom = EuclideanDomain.interval(0, 1)
    assert distance(dom, 0.25, 0.75) == 0.5
    assert distance(dom, 0.3, 0.3) == 0


def test_mixed_space_arguments_rejected():
    space = FiniteMetricSpace([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        distance(space, 0, 0.5)
    with pytest.raises(ValueError):
        distance(EuclideanDomain.interval(0, 1), 0.5, 3.0)


def test_domain_bounds_checked():
    with pytest.raises(MetricStructureError):
        EuclideanDomain.interval(1, 1)
    dom = EuclideanDomain((0, 0), (1, 2))
    assert dom.contains((1 + 5e-13, 2))
    assert not dom.contains((1 + 1e-9, 2))
    assert len(dom.corners()) == 4


def test_random_planar_space_is_metric():
    rng = np.random.default_rng(7)
    for _ in range(50):
        space = random_planar_space(rng, 6)
        assert validate_metric(space.dist) == []
        assert triangle_oracle(space.dist) == []


coords = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=200)
@given(st.lists(st.tuples(coords, coords, coords), min_size=3, max_size=3))
def test_euclidean_symmetry_and_triangle(points):
    dom = EuclideanDomain((-10, -10, -10), (10, 10, 10))
    a, b, c = points
    assert dom.distance(a, b) == dom.distance(b, a)
    assert dom.distance(a, c) <= dom.distance(a, b) + dom.distance(b, c) + 1e-12


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1), st.integers(2, 7))
def test_accepted_spaces_satisfy_axioms_exhaustively(seed, n):
    space = random_planar_space(np.random.default_rng(seed), n)
    d = space.dist
    for i in range(n):
        assert d[i][i] == 0
        for j in range(n):
            assert d[i][j] == d[j][i]
            if i != j:
                assert d[i][j] > 0
            for k in range(n):
                assert d[i][k] <= d[i][j] + d[j][k]
