"""Built-in example instances."""
from __future__ import annotations

from .contraction_pair import SelfMapPair
from .control_functions import Constant, ControlTriple, Identity
from .expr_lang import parse
from .jungck_solver import harmonic_partial_sums, lemma_limit_estimates
from .metric_core import EuclideanDomain, FiniteMetricSpace


def line_space(coords, labels=None) -> FiniteMetricSpace:
    """Finite subset of the real line with |a - b| as metric."""
    return FiniteMetricSpace([[abs(a - b) for b in coords] for a in coords], labels)


def three_point():
    """Points 0, 1, 3 on the line; T = identity, S: p0 -> p0, p1 -> p0, p2 -> p1."""
    space = line_space([0.0, 1.0, 3.0])
    pair = SelfMapPair([0, 0, 1], [0, 1, 2])
    return space, pair, ControlTriple(Identity(), Constant(0.6), Constant(0.3))


def constant_s():
    """S constant at a = p0 with T a = a, so a is the unique common fixed point."""
    space = line_space([0.0, 1.0, 2.5, 4.0])
    pair = SelfMapPair([0, 0, 0, 0], [0, 2, 3, 1])
    return space, pair, ControlTriple(Identity(), Constant(0.5), Constant(0.3))


def violating_pair():
    """T = identity, S swaps two points at distance 1."""
    space = line_space([0.0, 1.0])
    pair = SelfMapPair([1, 0], [0, 1])
    return space, pair, ControlTriple(Identity(), Constant(0.1), Constant(0.1))


def continuous(with_inverse: bool = True):
    """S(x) = x/4, T(x) = x/2 on [0, 1]."""
    domain = EuclideanDomain.interval(0.0, 1.0)
    pair = SelfMapPair(parse("x/4", "x"), parse("x/2", "x"), parse("2*x", "x") if with_inverse else None)
    return domain, pair, ControlTriple(Identity(), Constant(0.6), Constant(0.1))


def harmonic_diagnostics(epsilon0: float = 0.5, kmax: int = 100, length: int = 2000):
    points = harmonic_partial_sums(length)
    return lemma_limit_estimates(points, lambda a, b: abs(a - b), epsilon0, list(range(1, kmax + 1)))
