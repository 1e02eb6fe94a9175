"""Metric spaces: finite matrix-backed spaces and closed Euclidean boxes.

Points of a :class:`FiniteMetricSpace` are integer indices. Points of a
:class:`EuclideanDomain` are floats in dimension one and tuples of floats
otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

__all__ = [
    "MetricStructureError",
    "MetricAxiomError",
    "Violation",
    "FiniteMetricSpace",
    "EuclideanDomain",
    "PointRef",
    "validate_metric",
    "distance",
    "random_planar_space",
]

PointRef = Union[int, float, tuple]

CONTINUOUS_TOL = 1e-12


class MetricStructureError(ValueError):
    """The matrix is not square or holds non-finite entries."""


class MetricAxiomError(ValueError):
    """A well-formed matrix that violates at least one metric axiom."""

    def __init__(self, violations):
        self.violations = list(violations)
        head = "; ".join(str(v) for v in self.violations[:3])
        more = "" if len(self.violations) <= 3 else f" (+{len(self.violations) - 3} more)"
        super().__init__(f"metric axioms violated: {head}{more}")


@dataclass(frozen=True)
class Violation:
    axiom: str  # "identity", "symmetry" or "triangle"
    indices: tuple
    amount: float

    def __str__(self):
        return f"{self.axiom} at {self.indices} by {self.amount!r}"

    def to_dict(self):
        return {"axiom": self.axiom, "indices": list(self.indices), "amount": self.amount}


def _as_rows(matrix) -> list[list[float]]:
    try:
        rows = [[float(v) for v in row] for row in matrix]
    except (TypeError, ValueError) as exc:
        raise MetricStructureError(f"matrix is not a grid of reals: {exc}") from None
    n = len(rows)
    if n == 0:
        raise MetricStructureError("matrix is empty")
    for i, row in enumerate(rows):
        if len(row) != n:
            raise MetricStructureError(f"row {i} has {len(row)} entries, expected {n}")
        for j, v in enumerate(row):
            if not math.isfinite(v):
                raise MetricStructureError(f"entry ({i},{j}) is not finite: {v!r}")
    return rows


def validate_metric(matrix) -> list[Violation]:
    """Return every violated metric-axiom instance of ``matrix``.

    Comparisons are exact on the stored values. An empty list means the
    matrix is a metric. Symmetry is reported once per unordered pair and the
    triangle inequality once per (endpoints, middle) triple.

    Raises
    ------
    MetricStructureError
        If the matrix is not square or contains non-finite values.
    """
    d = _as_rows(matrix)
    n = len(d)
    a = np.array(d)
    off = ~np.eye(n, dtype=bool)
    if (
        np.all(np.diag(a) == 0.0)
        and np.all(a[off] > 0.0)
        and np.array_equal(a, a.T)
        and not np.any(a[:, None, :] > a[:, :, None] + a[None, :, :])
    ):
        return []
    out: list[Violation] = []
    for i in range(n):
        if d[i][i] != 0.0:
            out.append(Violation("identity", (i, i), abs(d[i][i])))
        for j in range(n):
            if i != j and d[i][j] <= 0.0:
                out.append(Violation("identity", (i, j), -d[i][j]))
    for i in range(n):
        for j in range(i + 1, n):
            if d[i][j] != d[j][i]:
                out.append(Violation("symmetry", (i, j), abs(d[i][j] - d[j][i])))
    seen = set()
    for i in range(n):
        for k in range(n):
            if i == k:
                continue
            for j in range(n):
                if j == i or j == k:
                    continue
                excess = d[i][k] - (d[i][j] + d[j][k])
                if excess > 0.0:
                    key = (min(i, k), j, max(i, k))
                    if key not in seen:
                        seen.add(key)
                        out.append(Violation("triangle", (i, j, k), excess))
    return out


@dataclass(frozen=True)
class FiniteMetricSpace:
    """An ``n``-point metric space given by its distance matrix.

    The matrix is validated on construction; a :class:`MetricAxiomError`
    carries the list of violations when it is not a metric.
    """

    labels: tuple
    dist: tuple

    def __init__(self, matrix, labels: Sequence[str] | None = None):
        rows = _as_rows(matrix)
        violations = validate_metric(rows)
        if violations:
            raise MetricAxiomError(violations)
        n = len(rows)
        if labels is None:
            labels = [f"p{i}" for i in range(n)]
        labels = tuple(str(s) for s in labels)
        if len(labels) != n:
            raise MetricStructureError(f"{len(labels)} labels for {n} points")
        if len(set(labels)) != n:
            raise MetricStructureError("labels are not unique")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dist", tuple(tuple(r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.labels)

    def points(self) -> range:
        return range(self.n)

    def contains(self, x) -> bool:
        return isinstance(x, (int, np.integer)) and not isinstance(x, bool) and 0 <= x < self.n

    def index_of(self, ref) -> int:
        """Resolve a label or an index to an index."""
        if isinstance(ref, str):
            try:
                return self.labels.index(ref)
            except ValueError:
                raise KeyError(f"unknown point label {ref!r}") from None
        if not self.contains(ref):
            raise KeyError(f"point index {ref!r} outside 0..{self.n - 1}")
        return int(ref)

    def distance(self, x: int, y: int) -> float:
        return self.dist[x][y]

    def diameter(self) -> float:
        return max(max(r) for r in self.dist)

    def matrix(self) -> np.ndarray:
        return np.array(self.dist, dtype=float)


@dataclass(frozen=True)
class EuclideanDomain:
    """Closed axis-aligned box ``[lower, upper]`` in R^dimension."""

    lower: tuple
    upper: tuple
    dimension: int = field(init=False)

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or not lo:
            raise MetricStructureError("lower and upper bounds must have the same positive length")
        for i, (a, b) in enumerate(zip(lo, hi)):
            if not (math.isfinite(a) and math.isfinite(b)):
                raise MetricStructureError(f"axis {i} has a non-finite bound")
            if not a < b:
                raise MetricStructureError(f"axis {i}: lower {a} is not below upper {b}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "dimension", len(lo))

    @classmethod
    def interval(cls, lower: float, upper: float) -> "EuclideanDomain":
        return cls((lower,), (upper,))

    def coords(self, x) -> tuple:
        if self.dimension == 1 and not isinstance(x, (tuple, list, np.ndarray)):
            return (float(x),)
        c = tuple(float(v) for v in x)
        if len(c) != self.dimension:
            raise ValueError(f"point has {len(c)} coordinates, domain has {self.dimension}")
        return c

    def point(self, coords) -> PointRef:
        """Canonical point representation for ``coords``."""
        c = tuple(float(v) for v in np.atleast_1d(coords))
        return c[0] if self.dimension == 1 else c

    def contains(self, x, tol: float = CONTINUOUS_TOL) -> bool:
        try:
            c = self.coords(x)
        except (TypeError, ValueError):
            return False
        return all(a - tol <= v <= b + tol for v, a, b in zip(c, self.lower, self.upper))

    def distance(self, x, y) -> float:
        if self.dimension == 1:
            return abs(float(x) - float(y))
        return math.dist(self.coords(x), self.coords(y))

    def diameter(self) -> float:
        return math.dist(self.lower, self.upper)

    def corners(self) -> list:
        out = []
        for mask in range(2 ** self.dimension):
            c = [self.upper[i] if mask >> i & 1 else self.lower[i] for i in range(self.dimension)]
            out.append(self.point(c))
        return out


def distance(space, x, y) -> float:
    """d(x, y) in ``space``; raises ``ValueError`` for foreign points."""
    if not (space.contains(x) and space.contains(y)):
        raise ValueError(f"points {x!r}, {y!r} do not both belong to {type(space).__name__}")
    return space.distance(x, y)


def random_planar_space(rng: np.random.Generator, n: int, max_tries: int = 100) -> FiniteMetricSpace:
    """Random point cloud in the unit square with its Euclidean metric.

    Rounding can break the triangle inequality for nearly collinear points;
    such draws are discarded and redrawn from the same generator.
    """
    for _ in range(max_tries):
        pts = rng.random((n, 2))
        diff = pts[:, None, :] - pts[None, :, :]
        mat = np.hypot(diff[..., 0], diff[..., 1])
        mat = np.minimum(mat, mat.T)
        try:
            return FiniteMetricSpace(mat.tolist())
        except MetricAxiomError:
            continue
    raise RuntimeError(f"no valid planar space after {max_tries} draws")
