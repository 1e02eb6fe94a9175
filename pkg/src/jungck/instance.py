"""JSON instance files.

An instance holds at most four sections::

    {
      "space":    {"type": "finite", "labels": [...], "matrix": [[...], ...]}
                | {"type": "interval", "lower": 0, "upper": 1}
                | {"type": "box", "lower": [...], "upper": [...]},
      "maps":     {"S": [...] | "x/4" | {"affine": {"matrix": ..., "offset": ...}},
                   "T": ..., "T_inverse": "2*x"},
      "controls": {"psi": {"family": "identity", "params": []},
                   "alpha": {"family": "constant", "params": [0.6]},
                   "beta": {"expr": "0.1"}},
      "solver":   {"x0": "p2" | 1.0 | [...], "tol": 1e-10, "max_iter": 10000}
    }

Finite map arrays may use labels or indices.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

from .contraction_pair import AffineMap, SelfMapPair
from .control_functions import ControlTriple
from .expr_lang import Expr, ExprError, parse
from .jungck_solver import DEFAULT_MAX_ITER, DEFAULT_TOL
from .metric_core import EuclideanDomain, FiniteMetricSpace, MetricStructureError

__all__ = ["InstanceError", "SECTIONS", "load", "loads", "space_from", "pair_from", "triple_from",
           "solver_from", "dump", "instance_dict"]

SECTIONS = ("space", "maps", "controls", "solver")


class InstanceError(ValueError):
    """Malformed instance: bad JSON, missing section, unknown label, bad expression."""


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise InstanceError("instance must be a JSON object")
    extra = sorted(set(doc) - set(SECTIONS))
    if extra:
        raise InstanceError(f"unknown section(s) {extra}; allowed: {list(SECTIONS)}")
    return doc


def load(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from None
    return loads(text)


def _section(doc: dict, name: str) -> dict:
    if name not in doc:
        raise InstanceError(f"missing section {name!r}")
    sec = doc[name]
    if not isinstance(sec, dict):
        raise InstanceError(f"section {name!r} must be an object")
    return sec


def finite_matrix(doc: dict):
    """(matrix, labels) of a finite space section without validating axioms."""
    sec = _section(doc, "space")
    if sec.get("type", "finite") != "finite":
        raise InstanceError("space is not finite")
    if "matrix" not in sec:
        raise InstanceError("finite space needs a 'matrix'")
    matrix = sec["matrix"]
    labels = sec.get("labels")
    if labels is None:
        labels = [f"p{i}" for i in range(len(matrix))]
    return matrix, labels


def space_from(doc: dict):
    sec = _section(doc, "space")
    kind = sec.get("type", "finite")
    try:
        if kind == "finite":
            matrix, labels = finite_matrix(doc)
            return FiniteMetricSpace(matrix, labels)
        if kind in ("interval", "box"):
            return EuclideanDomain(sec["lower"], sec["upper"])
    except KeyError as exc:
        raise InstanceError(f"space section lacks {exc}") from None
    except (TypeError, MetricStructureError) as exc:
        raise InstanceError(f"bad space: {exc}") from None
    raise InstanceError(f"unknown space type {kind!r}")


def _finite_map(values, space: FiniteMetricSpace, name: str):
    if not isinstance(values, list):
        raise InstanceError(f"map {name} on a finite space must be an array")
    try:
        return [space.index_of(v) for v in values]
    except KeyError as exc:
        raise InstanceError(f"map {name}: {exc.args[0]}") from None


def _continuous_map(value, name: str):
    if isinstance(value, str):
        try:
            return parse(value, var="x")
        except ExprError as exc:
            raise InstanceError(f"map {name}: {exc}") from None
    if isinstance(value, dict) and "affine" in value:
        a = value["affine"]
        try:
            return AffineMap(a["matrix"], a["offset"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"map {name}: bad affine map ({exc})") from None
    raise InstanceError(f"map {name} must be an expression string or an affine map")


def pair_from(doc: dict, space) -> SelfMapPair:
    sec = _section(doc, "maps")
    for key in ("S", "T"):
        if key not in sec:
            raise InstanceError(f"maps section lacks {key!r}")
    if isinstance(space, FiniteMetricSpace):
        pair = SelfMapPair(_finite_map(sec["S"], space, "S"), _finite_map(sec["T"], space, "T"))
        if len(pair.S) != space.n or len(pair.T) != space.n:
            raise InstanceError(f"maps must have {space.n} entries")
        return pair
    S, T = _continuous_map(sec["S"], "S"), _continuous_map(sec["T"], "T")
    inv = None
    if sec.get("T_inverse") is not None:
        inv = _continuous_map(sec["T_inverse"], "T_inverse")
    if space.dimension == 1 and not (isinstance(S, Expr) and isinstance(T, Expr)):
        raise InstanceError("maps on an interval must be expressions in x")
    if space.dimension > 1 and not (isinstance(S, AffineMap) and isinstance(T, AffineMap)):
        raise InstanceError("maps on a box of dimension > 1 must be affine")
    if isinstance(S, AffineMap) and len(S.offset) != space.dimension:
        raise InstanceError("affine map dimension does not match the domain")
    return SelfMapPair(S, T, inv)


def triple_from(doc: dict) -> ControlTriple:
    sec = _section(doc, "controls")
    try:
        return ControlTriple.from_dict(sec)
    except KeyError as exc:
        raise InstanceError(f"controls section lacks {exc}") from None
    except (ExprError, ValueError, TypeError) as exc:
        raise InstanceError(f"bad control function: {exc}") from None


def parse_point(value, space):
    """A start point from a label, an index, a number or a coordinate list."""
    if isinstance(space, FiniteMetricSpace):
        if isinstance(value, str) and value not in space.labels:
            try:
                value = int(value)
            except ValueError:
                pass
        try:
            return space.index_of(value)
        except KeyError as exc:
            raise InstanceError(str(exc.args[0])) from None
    try:
        if isinstance(value, str):
            value = [float(v) for v in value.split(",")]
        point = space.point(value)
    except (TypeError, ValueError):
        raise InstanceError(f"bad start point {value!r}") from None
    if not space.contains(point):
        raise InstanceError(f"start point {value!r} lies outside the domain")
    return point


def solver_from(doc: dict, space, x0=None, tol=None, max_iter=None) -> dict:
    sec = doc.get("solver", {})
    if not isinstance(sec, dict):
        raise InstanceError("section 'solver' must be an object")
    if x0 is None:
        if "x0" not in sec:
            raise InstanceError("no start point: give solver.x0 or --x0")
        x0 = sec["x0"]
    tol = float(tol if tol is not None else sec.get("tol", DEFAULT_TOL))
    max_iter = int(max_iter if max_iter is not None else sec.get("max_iter", DEFAULT_MAX_ITER))
    if not (math.isfinite(tol) and tol > 0) or max_iter < 1:
        raise InstanceError("tol must be positive and max_iter at least 1")
    return {"x0": parse_point(x0, space), "tol": tol, "max_iter": max_iter}


def instance_dict(space, pair: SelfMapPair | None = None, triple: ControlTriple | None = None,
                  solver: dict | None = None) -> dict:
    doc: dict = {}
    if isinstance(space, FiniteMetricSpace):
        doc["space"] = {"type": "finite", "labels": list(space.labels), "matrix": [list(r) for r in space.dist]}
    elif space.dimension == 1:
        doc["space"] = {"type": "interval", "lower": space.lower[0], "upper": space.upper[0]}
    else:
        doc["space"] = {"type": "box", "lower": list(space.lower), "upper": list(space.upper)}
    if pair is not None:
        doc["maps"] = pair.maps_dict(space if isinstance(space, FiniteMetricSpace) else None)
    if triple is not None:
        doc["controls"] = triple.to_dict()
    if solver is not None:
        doc["solver"] = solver
    return doc


def dump(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
