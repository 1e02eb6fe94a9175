"""Jungck iteration y_n = S x_n = T x_{n+1} and Cauchy-sequence diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .contraction_pair import MapDomainError, SelfMapPair
from .metric_core import FiniteMetricSpace

__all__ = [
    "InclusionError",
    "CapabilityError",
    "ContradictionError",
    "IterationStep",
    "IterationTrace",
    "InclusionReport",
    "CauchyRow",
    "CauchyDiagnostics",
    "resolve_T_preimage",
    "check_inclusion",
    "iterate",
    "extract_poc",
    "cauchy_crossing_indices",
    "lemma_limit_estimates",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000
PREIMAGE_TOL = 1e-12
MONOTONE_SAMPLES = 257


class InclusionError(ValueError):
    """No T-preimage exists: the image of S is not contained in the image of T."""

    def __init__(self, message: str, point=None):
        self.point = point
        super().__init__(message)


class CapabilityError(RuntimeError):
    """The solver has no method to invert T here."""


class ContradictionError(RuntimeError):
    """The limit of a converged trace is not a point of coincidence."""


def _is_finite(space) -> bool:
    return isinstance(space, FiniteMetricSpace)


@lru_cache(maxsize=64)
def _monotone_direction(T, lower: float, upper: float) -> int:
    xs = np.linspace(lower, upper, MONOTONE_SAMPLES)
    ys = [T(float(x)) for x in xs]
    diffs = np.diff(ys)
    if np.all(diffs >= 0):
        return 1
    if np.all(diffs <= 0):
        return -1
    return 0


def resolve_T_preimage(pair: SelfMapPair, space, y):
    """A point x with T x = y.

    Finite spaces return the smallest such index. On an interval the
    ``T_inverse`` hint is used when present, otherwise bisection on a
    monotone T; affine T is solved linearly. The result satisfies
    d(Tx, y) <= 1e-12 on continuous domains.
    """
    if _is_finite(space):
        for x, tx in enumerate(pair.T):
            if tx == y:
                return x
        raise InclusionError(f"{space.labels[y]} is not in the image of T", y)

    if pair.kind == "affine":
        try:
            x = space.point(pair.T.solve(y))
        except np.linalg.LinAlgError:
            raise CapabilityError("affine T is singular; no linear inverse") from None
        if not space.contains(x):
            raise InclusionError(f"preimage of {y!r} lies outside the domain", y)
        return x

    if pair.T_inverse is not None:
        try:
            x = pair.T_inverse(y)
        except Exception as exc:
            raise InclusionError(f"T_inverse fails at {y!r}: {exc}", y) from None
        if space.contains(x):
            x = min(max(x, space.lower[0]), space.upper[0])
            if space.distance(pair.apply_t(x), y) <= PREIMAGE_TOL:
                return x
        raise InclusionError(f"T_inverse({y!r}) = {x!r} is not a preimage in the domain", y)

    lo, hi = space.lower[0], space.upper[0]
    direction = _monotone_direction(pair.T, lo, hi)
    if direction == 0:
        raise CapabilityError("T is not monotone on the domain and no T_inverse was given")
    t_lo, t_hi = pair.apply_t(lo), pair.apply_t(hi)
    if abs(t_lo - y) <= PREIMAGE_TOL:
        return lo
    if abs(t_hi - y) <= PREIMAGE_TOL:
        return hi
    if not min(t_lo, t_hi) <= y <= max(t_lo, t_hi):
        raise InclusionError(f"{y!r} is outside T(M) = [{min(t_lo, t_hi)!r}, {max(t_lo, t_hi)!r}]", y)
    x = brentq(lambda s: pair.apply_t(s) - y, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(pair.apply_t(x) - y) > PREIMAGE_TOL:
        raise CapabilityError(f"bisection residual at {y!r} exceeds {PREIMAGE_TOL}")
    return x


@dataclass
class InclusionReport:
    holds: bool
    checked: int
    witnesses: list = field(default_factory=list)

    def to_dict(self):
        return {"holds": self.holds, "checked": self.checked, "witnesses": self.witnesses}


def check_inclusion(pair: SelfMapPair, space, samples: int = 1025) -> InclusionReport:
    """Is S(M) contained in T(M)?

    Exact on finite spaces (witnesses are labels of S-images missing from
    T(M)); on continuous domains every S x over a grid of ``samples`` points
    per axis (at most 1025 points total) must admit a T-preimage.
    """
    if _is_finite(space):
        t_image = set(pair.T)
        missing = sorted(set(pair.S) - t_image)
        return InclusionReport(not missing, space.n, [space.labels[i] for i in missing])
    if space.dimension == 1:
        xs = [space.point(v) for v in np.linspace(space.lower[0], space.upper[0], samples)]
    else:
        per_axis = max(2, int(round(samples ** (1.0 / space.dimension))))
        axes = [np.linspace(a, b, per_axis) for a, b in zip(space.lower, space.upper)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, space.dimension)
        xs = [space.point(v) for v in mesh]
    witnesses = []
    for x in xs:
        try:
            resolve_T_preimage(pair, space, pair.apply_s(x))
        except (InclusionError, MapDomainError):
            witnesses.append(x)
    return InclusionReport(not witnesses, len(xs), witnesses[:100])


@dataclass
class IterationStep:
    n: int
    x: object
    y: object
    gap: float | None


@dataclass
class IterationTrace:
    steps: list
    status: str  # "converged", "max-iterations" or "preimage-failure"
    z: object = None
    converged_at: int | None = None
    message: str = ""

    @property
    def gaps(self) -> list:
        return [s.gap for s in self.steps if s.gap is not None]

    def to_dict(self, space=None):
        lbl = (lambda p: space.labels[p]) if _is_finite(space) else (lambda p: p)
        return {
            "status": self.status,
            "z": lbl(self.z) if self.z is not None else None,
            "converged_at": self.converged_at,
            "message": self.message,
            "steps": [
                {"n": s.n, "x": lbl(s.x), "y": lbl(s.y), "gap": s.gap} for s in self.steps
            ],
        }


def iterate(
    pair: SelfMapPair,
    space,
    x0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> IterationTrace:
    """Run x_{n+1} = T^{-1}(S x_n) and record gaps d(y_n, y_{n+1}).

    Finite spaces stop on an exact repeat (gap 0); continuous domains stop at
    the first gap < tol, say at index n. Then ``z`` = y_{n+1}, and the trace
    ends with the T-preimage of z, so on a finite space the last two x
    entries coincide.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be positive")
    finite = _is_finite(space)
    if not space.contains(x0):
        raise ValueError(f"start point {x0!r} is not in the space")

    steps = []
    x = x0
    y = pair.apply_s(x)
    for n in range(max_iter):
        try:
            x_next = resolve_T_preimage(pair, space, y)
        except InclusionError as exc:
            steps.append(IterationStep(n, x, y, None))
            return IterationTrace(steps, "preimage-failure", message=str(exc))
        y_next = pair.apply_s(x_next)
        gap = space.distance(y, y_next)
        steps.append(IterationStep(n, x, y, gap))
        if (gap == 0.0) if finite else (gap < tol):
            steps.append(IterationStep(n + 1, x_next, y_next, None))
            # closing row: the T-preimage of the limit
            try:
                u = resolve_T_preimage(pair, space, y_next)
                steps.append(IterationStep(n + 2, u, pair.apply_s(u), None))
            except InclusionError:
                pass
            return IterationTrace(steps, "converged", z=y_next, converged_at=n)
        x, y = x_next, y_next
    steps.append(IterationStep(max_iter, x, y, None))
    return IterationTrace(steps, "max-iterations", message=f"no convergence in {max_iter} steps")


def extract_poc(trace: IterationTrace, pair: SelfMapPair, space, tol: float = DEFAULT_TOL):
    """(u, z) with T u = z and S u = z within ``tol`` (exactly on finite spaces).

    Raises :class:`ContradictionError` when S u misses z, which can only
    happen when the contraction premises do not hold.
    """
    if trace.status != "converged":
        raise ValueError(f"trace did not converge (status {trace.status})")
    z = trace.z
    u = resolve_T_preimage(pair, space, z)
    limit = 0.0 if _is_finite(space) else tol
    d_su = space.distance(pair.apply_s(u), z)
    d_tu = space.distance(pair.apply_t(u), z)
    if d_su > limit or d_tu > limit:
        raise ContradictionError(f"d(Su, z) = {d_su!r}, d(Tu, z) = {d_tu!r} exceed {limit!r}")
    return u, z


@dataclass(frozen=True)
class CauchyRow:
    k: int
    n_k: int
    m_k: int
    d_m_n: float  # d(x_{m(k)}, x_{n(k)})
    d_m1_n: float  # d(x_{m(k)-1}, x_{n(k)})
    d_m1_n1: float  # d(x_{m(k)-1}, x_{n(k)+1})


@dataclass
class CauchyDiagnostics:
    epsilon0: float
    rows: list
    missing: list = field(default_factory=list)

    def to_dict(self):
        return {
            "epsilon0": self.epsilon0,
            "rows": [r.__dict__ for r in self.rows],
            "missing": list(self.missing),
        }


def cauchy_crossing_indices(
    points: Sequence,
    metric: Callable,
    epsilon0: float,
    k: int,
) -> tuple[int, int] | None:
    """Smallest n(k) > k, then smallest m(k) > n(k), with

    d(x_{m(k)}, x_{n(k)}) >= epsilon0 and d(x_{m(k)-1}, x_{n(k)}) < epsilon0.

    ``None`` when the finite prefix has no such pair.
    """
    if not epsilon0 > 0:
        raise ValueError("epsilon0 must be positive")
    N = len(points)
    for n in range(k + 1, N):
        for m in range(n + 1, N):
            if metric(points[m], points[n]) >= epsilon0 and metric(points[m - 1], points[n]) < epsilon0:
                return n, m
    return None


def lemma_limit_estimates(
    points: Sequence,
    metric: Callable,
    epsilon0: float,
    ks: Sequence[int],
) -> CauchyDiagnostics:
    """Tabulate the three distances that tend to epsilon0 along the crossings."""
    rows = []
    missing = []
    for k in ks:
        idx = cauchy_crossing_indices(points, metric, epsilon0, k)
        if idx is None or idx[0] + 1 >= len(points):
            missing.append(k)
            continue
        n, m = idx
        rows.append(
            CauchyRow(
                k,
                n,
                m,
                metric(points[m], points[n]),
                metric(points[m - 1], points[n]),
                metric(points[m - 1], points[n + 1]),
            )
        )
    return CauchyDiagnostics(epsilon0, rows, missing)


def harmonic_partial_sums(count: int) -> list[float]:
    """s_0 = 0, s_n = 1 + 1/2 + ... + 1/n."""
    out = [0.0]
    for j in range(1, count):
        out.append(out[-1] + 1.0 / j)
    return out
