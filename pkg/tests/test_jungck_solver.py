import math

import pytest

from jungck import demos
from jungck.contraction_pair import SelfMapPair
from jungck.expr_lang import parse
from jungck.jungck_solver import (
    CapabilityError,
    ContradictionError,
    InclusionError,
    cauchy_crossing_indices,
    check_inclusion,
    extract_poc,
    harmonic_partial_sums,
    iterate,
    lemma_limit_estimates,
    resolve_T_preimage,
)
from jungck.metric_core import EuclideanDomain

from .oracles import harmonic


def line(a, b):
    return abs(a - b)


def test_preimage_identity(three_point):
    space, pair, _ = three_point
    assert [resolve_T_preimage(pair, space, y) for y in space.points()] == [0, 1, 2]


def test_preimage_smallest_index():
    space = demos.line_space([0.0, 1.0, 2.0])
    pair = SelfMapPair([1, 1, 1], [1, 1, 2])
    assert resolve_T_preimage(pair, space, 1) == 0
    with pytest.raises(InclusionError) as info:
        resolve_T_preimage(pair, space, 0)
    assert info.value.point == 0


@pytest.mark.parametrize("with_inverse", [True, False])
def test_preimage_half(with_inverse):
    dom, pair, _ = demos.continuous(with_inverse)
    x = resolve_T_preimage(pair, dom, 0.25)
    assert abs(x - 0.5) <= 1e-12


def test_preimage_outside_image():
    dom, pair, _ = demos.continuous(False)
    with pytest.raises(InclusionError):
        resolve_T_preimage(pair, dom, 0.75)


def test_nonmonotone_without_hint():
    dom = EuclideanDomain.interval(0, 1)
    pair = SelfMapPair(parse("x/8"), parse("4*x*(1-x)"))
    with pytest.raises(CapabilityError):
        resolve_T_preimage(pair, dom, 0.1)
    hinted = SelfMapPair(pair.S, pair.T, parse("(1 - sqrt(1 - x))/2"))
    x = resolve_T_preimage(hinted, dom, 0.1)
    assert abs(4 * x * (1 - x) - 0.1) <= 1e-12


def test_inclusion_finite():
    space = demos.line_space([0.0, 1.0, 2.0])
    rep = check_inclusion(SelfMapPair([0, 0, 0], [1, 1, 2]), space)
    assert not rep.holds and rep.witnesses == ["p0"]
    space, pair, _ = demos.constant_s()
    assert check_inclusion(pair, space).holds


def test_inclusion_continuous():
    dom, pair, _ = demos.continuous(False)
    rep = check_inclusion(pair, dom)
    assert rep.holds and rep.checked == 1025
    bad = SelfMapPair(parse("x"), parse("x/2"))
    assert not check_inclusion(bad, dom).holds


def test_three_point_trace(three_point):
    space, pair, _ = three_point
    trace = iterate(pair, space, 2, max_iter=12)
    assert [s.x for s in trace.steps] == [2, 1, 0, 0]
    assert trace.status == "converged" and trace.z == 0
    assert trace.gaps == [1.0, 0.0]
    d = trace.to_dict(space)
    assert [s["x"] for s in d["steps"]] == ["p2", "p1", "p0", "p0"]
    for s in trace.steps:  # y_n = S x_n
        assert s.y == pair.S[s.x]
    for a, b in zip(trace.steps, trace.steps[1:]):  # T x_{n+1} = y_n
        assert pair.T[b.x] == a.y
    assert extract_poc(trace, pair, space) == (0, 0)


def test_continuous_closed_form(continuous_demo):
    dom, pair, _ = continuous_demo
    trace = iterate(pair, dom, 1.0, tol=1e-10)
    assert trace.status == "converged"
    assert len(trace.steps) <= 40
    assert abs(trace.z) <= 1e-10
    for s in trace.steps[:-1]:
        assert math.isclose(s.y, 2.0 ** -s.n / 4, rel_tol=1e-12)
    u, z = extract_poc(trace, pair, dom, 1e-10)
    # u is the T-preimage of z, so u = 2z exactly; both coincidence residuals stay under tol
    assert abs(z) <= 1e-10 and u == 2 * z
    assert abs(pair.apply_s(u) - z) <= 1e-10 and abs(pair.apply_t(u) - z) <= 1e-10


def test_start_at_common_fixed_point():
    space, pair, _ = demos.constant_s()
    trace = iterate(pair, space, 0)
    assert trace.converged_at == 0 and trace.z == 0


def test_preimage_failure_midrun():
    space = demos.line_space([0.0, 1.0, 2.0])
    pair = SelfMapPair([0, 0, 0], [1, 1, 2])
    trace = iterate(pair, space, 2)
    assert trace.status == "preimage-failure"
    assert "p0" in trace.message


def test_max_iterations_and_contradiction():
    space, pair, _ = demos.violating_pair()
    trace = iterate(pair, space, 0, max_iter=5)
    assert trace.status == "max-iterations" and len(trace.steps) == 6
    with pytest.raises(ValueError):
        extract_poc(trace, pair, space)
    # S = T on two points: S(T^-1(z)) = z, fine; a pair with T-preimage mismatch:
    space = demos.line_space([0.0, 1.0])
    pair = SelfMapPair([1, 1], [0, 0])
    # S(M) = {p1} is not in T(M) = {p0}
    assert iterate(pair, space, 0).status == "preimage-failure"


def test_contradiction_report():
    space = demos.line_space([0.0, 1.0, 2.0])
    pair = SelfMapPair([1, 1, 2], [1, 2, 1])
    trace = iterate(pair, space, 0)
    assert trace.status == "converged" and trace.z == 1
    # preimage of p1 is p0 (smallest index), S p0 = p1: consistent
    assert extract_poc(trace, pair, space) == (0, 1)
    fake = type(trace)(trace.steps, "converged", z=2)
    with pytest.raises(ContradictionError):
        extract_poc(fake, pair, space)  # preimage of p2 is p1, S p1 = p1 != p2


def test_harmonic_oracle_matches():
    assert harmonic_partial_sums(50) == harmonic(50)


def test_crossing_indices_harmonic_k10():
    pts = harmonic_partial_sums(500)
    n, m = cauchy_crossing_indices(pts, line, 0.5, 10)
    assert m > n > 10
    assert line(pts[m], pts[n]) >= 0.5 and line(pts[m - 1], pts[n]) < 0.5
    # smallest n is k + 1 because the tail diverges
    assert n == 11


def test_crossing_indices_trivial_cases():
    assert cauchy_crossing_indices([1.0] * 20, line, 0.1, 3) is None
    alt = [float(i % 2) for i in range(10)]
    assert cauchy_crossing_indices(alt, line, 0.5, 1) == (2, 3)
    with pytest.raises(ValueError):
        cauchy_crossing_indices(alt, line, 0.0, 1)


def test_lemma_estimates_converge():
    pts = harmonic_partial_sums(2000)
    diag = lemma_limit_estimates(pts, line, 0.5, [10, 100])
    assert not diag.missing
    r10, r100 = diag.rows
    for value in (r100.d_m_n, r100.d_m1_n, r100.d_m1_n1):
        assert abs(value - 0.5) < 0.05

    def dev(r):
        return max(abs(v - 0.5) for v in (r.d_m_n, r.d_m1_n, r.d_m1_n1))

    assert dev(r100) < dev(r10)


def test_lemma_estimates_large_epsilon():
    pts = harmonic_partial_sums(100)
    diag = lemma_limit_estimates(pts, line, 100.0, [1, 2, 3])
    assert diag.rows == [] and diag.missing == [1, 2, 3]
