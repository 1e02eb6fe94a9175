"""Pairs of self-maps (S, T) and certification of the contraction inequality

    psi(d(Sx, Sy)) <= alpha(d(Tx, Ty)) psi(d(Tx, Ty)) + beta(d(Tx, Ty)) psi(m(x, y))

with the rational term

    m(x, y) = max{ d(Sy, Ty) (1 + d(Sx, Tx)) / (1 + d(Tx, Ty)), d(Tx, Ty) }.

``m`` is not symmetric, so every check runs over ordered pairs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .expr_lang import Expr, ExprError, to_text
from .metric_core import EuclideanDomain, FiniteMetricSpace

__all__ = [
    "MapDomainError",
    "AffineMap",
    "SelfMapPair",
    "InequalityCheck",
    "CertificationReport",
    "m_value",
    "check_inequality_at",
    "certify_finite",
    "certify_sampled",
    "MAX_LISTED_VIOLATIONS",
]

MAX_LISTED_VIOLATIONS = 100


class MapDomainError(ValueError):
    """A map is not a total self-map of its space at some point."""

    def __init__(self, message: str, point=None):
        self.point = point
        super().__init__(message)


@dataclass(frozen=True)
class AffineMap:
    """x -> A x + b on R^d."""

    matrix: tuple
    offset: tuple

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        b = np.atleast_1d(np.asarray(self.offset, dtype=float))
        if a.shape != (len(b), len(b)):
            raise ValueError(f"affine map needs a square matrix matching the offset, got {a.shape} and {b.shape}")
        object.__setattr__(self, "matrix", tuple(tuple(float(v) for v in row) for row in a))
        object.__setattr__(self, "offset", tuple(float(v) for v in b))

    def __call__(self, x):
        v = np.asarray(self.matrix) @ np.atleast_1d(np.asarray(x, dtype=float)) + np.asarray(self.offset)
        return tuple(float(c) for c in v)

    def solve(self, y):
        """The unique preimage of ``y``; ``LinAlgError`` when A is singular."""
        rhs = np.atleast_1d(np.asarray(y, dtype=float)) - np.asarray(self.offset)
        return tuple(float(c) for c in np.linalg.solve(np.asarray(self.matrix), rhs))

    def to_dict(self):
        return {"affine": {"matrix": [list(r) for r in self.matrix], "offset": list(self.offset)}}


@dataclass(frozen=True)
class SelfMapPair:
    """The maps S and T.

    Finite spaces use tuples of target indices, one-dimensional domains use
    :class:`Expr` in ``x``, boxes of higher dimension use :class:`AffineMap`.
    ``T_inverse`` is an optional closed-form inverse for 1-D solving.
    """

    S: object
    T: object
    T_inverse: Expr | None = None

    def __post_init__(self):
        if isinstance(self.S, (list, tuple, np.ndarray)):
            object.__setattr__(self, "S", tuple(int(v) for v in self.S))
        if isinstance(self.T, (list, tuple, np.ndarray)):
            object.__setattr__(self, "T", tuple(int(v) for v in self.T))

    @property
    def kind(self) -> str:
        if isinstance(self.S, tuple) and isinstance(self.T, tuple):
            return "finite"
        if isinstance(self.S, AffineMap) and isinstance(self.T, AffineMap):
            return "affine"
        if isinstance(self.S, Expr) and isinstance(self.T, Expr):
            return "expr"
        raise TypeError("S and T must both be index arrays, both expressions, or both affine maps")

    def apply_s(self, x):
        return self._apply(self.S, x, "S")

    def apply_t(self, x):
        return self._apply(self.T, x, "T")

    @staticmethod
    def _apply(f, x, name):
        if isinstance(f, tuple):
            return f[x]
        try:
            return f(x)
        except ExprError as exc:
            raise MapDomainError(f"{name} cannot be evaluated at {x!r}: {exc}", x) from None

    def check_finite(self, space: FiniteMetricSpace):
        if self.kind != "finite":
            raise TypeError("finite space needs index-array maps")
        for name, f in (("S", self.S), ("T", self.T)):
            if len(f) != space.n:
                raise MapDomainError(f"{name} has {len(f)} entries for {space.n} points")
            for i, v in enumerate(f):
                if not 0 <= v < space.n:
                    raise MapDomainError(f"{name}({i}) = {v} is not a point of the space", i)

    def maps_dict(self, space=None) -> dict:
        out = {}
        for name, f in (("S", self.S), ("T", self.T)):
            if isinstance(f, tuple):
                out[name] = [space.labels[v] for v in f] if space is not None else list(f)
            elif isinstance(f, AffineMap):
                out[name] = f.to_dict()
            else:
                out[name] = to_text(f)
        if self.T_inverse is not None:
            out["T_inverse"] = to_text(self.T_inverse)
        return out


@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs: float
    slack: float


@dataclass
class CertificationReport:
    """Outcome of a certification run.

    ``min_slack`` is taken over ordered pairs with x != y. Diagonal pairs
    have LHS = psi(0) = 0, so their slack is RHS >= 0 and is exactly 0 at
    any coincidence point; it is reported apart as ``min_diagonal_slack``.
    Violations are counted over all pairs.
    """

    mode: str
    pairs_checked: int
    min_slack: float
    min_slack_at: tuple | None
    violation_count: int
    violations: list = field(default_factory=list)
    complete: bool = True
    min_diagonal_slack: float = math.inf

    @property
    def certified(self) -> bool:
        return self.violation_count == 0 and self.min_slack >= 0.0

    def to_dict(self):
        return {
            "mode": self.mode,
            "pairs_checked": self.pairs_checked,
            "min_slack": self.min_slack,
            "min_slack_at": list(self.min_slack_at) if self.min_slack_at is not None else None,
            "min_diagonal_slack": self.min_diagonal_slack,
            "violation_count": self.violation_count,
            "violations": self.violations,
            "complete": self.complete,
            "certified": self.certified,
        }


def _terms(space, sx, tx, sy, ty):
    d = space.distance
    d_tt = d(tx, ty)
    m = max(d(sy, ty) * (1.0 + d(sx, tx)) / (1.0 + d_tt), d_tt)
    return d(sx, sy), d_tt, m


def m_value(pair: SelfMapPair, space, x, y) -> float:
    """max{ d(Sy,Ty)(1+d(Sx,Tx))/(1+d(Tx,Ty)), d(Tx,Ty) }."""
    sx, tx, sy, ty = pair.apply_s(x), pair.apply_t(x), pair.apply_s(y), pair.apply_t(y)
    return _terms(space, sx, tx, sy, ty)[2]


def _inequality(triple, d_ss, d_tt, m) -> InequalityCheck:
    psi = triple.psi
    lhs = psi(d_ss)
    rhs = triple.alpha(d_tt) * psi(d_tt) + triple.beta(d_tt) * psi(m)
    return InequalityCheck(lhs, rhs, rhs - lhs)


def check_inequality_at(pair: SelfMapPair, triple, space, x, y) -> InequalityCheck:
    """Both sides of the contraction inequality at the ordered pair (x, y)."""
    sx, tx, sy, ty = pair.apply_s(x), pair.apply_t(x), pair.apply_s(y), pair.apply_t(y)
    return _inequality(triple, *_terms(space, sx, tx, sy, ty))


class _Tally:
    def __init__(self, space):
        self.space = space
        self.min_slack = math.inf
        self.at = None
        self.diagonal = math.inf
        self.count = 0
        self.rows: list = []
        self.checked = 0

    def add(self, x, y, chk: InequalityCheck, same: bool):
        self.checked += 1
        if same:
            self.diagonal = min(self.diagonal, chk.slack)
        elif chk.slack < self.min_slack:
            self.min_slack = chk.slack
            lbl = self.space.labels if isinstance(self.space, FiniteMetricSpace) else None
            self.at = (lbl[x], lbl[y]) if lbl else (x, y)
        if chk.slack < 0.0:
            self.count += 1
            if len(self.rows) < MAX_LISTED_VIOLATIONS:
                self.rows.append(_violation_row(self.space, x, y, chk))
            return False
        return True

    def report(self, mode, complete=True) -> CertificationReport:
        return CertificationReport(mode, self.checked, self.min_slack, self.at, self.count, self.rows,
                                   complete, self.diagonal)


def _violation_row(space, x, y, chk: InequalityCheck) -> dict:
    def lbl(p):
        return space.labels[p] if isinstance(space, FiniteMetricSpace) else p

    return {"x": lbl(x), "y": lbl(y), "lhs": chk.lhs, "rhs": chk.rhs}


def certify_finite(
    pair: SelfMapPair,
    triple,
    space: FiniteMetricSpace,
    stop_at_first: bool = False,
) -> CertificationReport:
    """Check the inequality at all n^2 ordered pairs, row-major.

    ``stop_at_first`` ends the scan at the first violation (used by rejection
    sampling); the report is then marked incomplete.
    """
    pair.check_finite(space)
    S, T = pair.S, pair.T
    tally = _Tally(space)
    for x in range(space.n):
        for y in range(space.n):
            chk = _inequality(triple, *_terms(space, S[x], T[x], S[y], T[y]))
            if not tally.add(x, y, chk, x == y) and stop_at_first:
                return tally.report("exhaustive", complete=False)
    return tally.report("exhaustive")


def _probe_points(domain: EuclideanDomain) -> list:
    pts = list(domain.corners())
    lo, hi = np.asarray(domain.lower), np.asarray(domain.upper)
    for frac in np.linspace(0.0, 1.0, 9)[1:-1]:
        pts.append(domain.point(lo + frac * (hi - lo)))
    return pts


def certify_sampled(
    pair: SelfMapPair,
    triple,
    domain: EuclideanDomain,
    samples: int,
    seed: int,
) -> CertificationReport:
    """Seeded sampled certification on a box; evidence, not proof.

    Checks ``samples`` uniform pairs in both orders, every ordered pair of
    corners, and the diagonal (x, x) at corners and interior probe points.
    Raises :class:`MapDomainError` when an image leaves the domain.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    lo, hi = np.asarray(domain.lower), np.asarray(domain.upper)
    draws = lo + rng.random((samples, 2, domain.dimension)) * (hi - lo)

    pairs: list = []
    corners = domain.corners()
    pairs.extend((a, b) for a in corners for b in corners)
    pairs.extend((p, p) for p in _probe_points(domain))
    for x, y in draws:
        px, py = domain.point(x), domain.point(y)
        pairs.append((px, py))
        pairs.append((py, px))

    images: dict = {}

    def image(p):
        key = p
        if key not in images:
            sp, tp = pair.apply_s(p), pair.apply_t(p)
            for name, v in (("S", sp), ("T", tp)):
                if not domain.contains(v):
                    raise MapDomainError(f"{name}({p!r}) = {v!r} leaves the domain", p)
            images[key] = (sp, tp)
        return images[key]

    tally = _Tally(domain)
    for x, y in pairs:
        sx, tx = image(x)
        sy, ty = image(y)
        tally.add(x, y, _inequality(triple, *_terms(domain, sx, tx, sy, ty)), x == y)
    return tally.report("sampled")
