"""Altering distance functions (psi) and control functions (alpha, beta).

Built-in families are certified analytically; expression-defined functions
are checked on a grid, with the one-sided limsup conditions estimated by
geometric probing. A sampled certificate is evidence, never a proof, and
says so in its caveats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .expr_lang import Expr, ExprError, parse, to_text

__all__ = [
    "FunctionEvalError",
    "Identity",
    "Power",
    "Saturating",
    "Constant",
    "ExprFunction",
    "ControlTriple",
    "FunctionCertificate",
    "function_from_descriptor",
    "default_grid",
    "check_altering_distance",
    "check_control_pair",
    "DEFAULT_DELTA",
    "DEFAULT_PROBES",
    "REQUIRED_MARGIN",
]

DEFAULT_DELTA = 1e-3
DEFAULT_PROBES = 12
REQUIRED_MARGIN = 1e-9
DEFAULT_GRID_POINTS = 256


class FunctionEvalError(ValueError):
    def __init__(self, name: str, t: float, cause: Exception):
        self.t = t
        super().__init__(f"{name} failed at t={t!r}: {cause}")


@dataclass(frozen=True)
class Identity:
    analytic = True

    def __call__(self, t):
        return t

    def to_dict(self):
        return {"family": "identity", "params": []}


@dataclass(frozen=True)
class Power:
    p: float
    analytic = True

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p >= 1):
            raise ValueError(f"power family needs p >= 1, got {self.p!r}")

    def __call__(self, t):
        return t ** self.p

    def to_dict(self):
        return {"family": "power", "params": [self.p]}


@dataclass(frozen=True)
class Saturating:
    """t / (1 + t)."""

    analytic = True

    def __call__(self, t):
        return t / (1.0 + t)

    def to_dict(self):
        return {"family": "saturating", "params": []}


@dataclass(frozen=True)
class Constant:
    c: float
    analytic = True

    def __post_init__(self):
        if not (0.0 <= self.c < 1.0):
            raise ValueError(f"constant control needs c in [0, 1), got {self.c!r}")

    def __call__(self, t):
        return self.c

    def to_dict(self):
        return {"family": "constant", "params": [self.c]}


@dataclass(frozen=True)
class ExprFunction:
    expr: Expr
    analytic = False

    def __call__(self, t):
        return self.expr(t)

    def to_dict(self):
        return {"expr": to_text(self.expr)}


PSI_FAMILIES = {"identity": Identity, "power": Power, "saturating": Saturating}
CONTROL_FAMILIES = {"constant": Constant}


def function_from_descriptor(desc, role: str = "psi"):
    """Build a function from ``{"family": ..., "params": [...]}`` or ``{"expr": ...}``.

    ``role`` is ``"psi"`` or ``"control"`` and selects the admissible families.
    """
    if not isinstance(desc, dict):
        raise ValueError(f"function descriptor must be an object, got {desc!r}")
    if "expr" in desc:
        return ExprFunction(parse(str(desc["expr"]), var="t"))
    families = PSI_FAMILIES if role == "psi" else CONTROL_FAMILIES
    name = desc.get("family")
    if name not in families:
        raise ValueError(f"unknown {role} family {name!r}; expected one of {sorted(families)}")
    params = desc.get("params", [])
    return families[name](*[float(p) for p in params])


@dataclass(frozen=True)
class ControlTriple:
    psi: object = field(default_factory=Identity)
    alpha: object = field(default_factory=lambda: Constant(0.5))
    beta: object = field(default_factory=lambda: Constant(0.25))

    def to_dict(self):
        return {"psi": self.psi.to_dict(), "alpha": self.alpha.to_dict(), "beta": self.beta.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(
            psi=function_from_descriptor(d["psi"], "psi"),
            alpha=function_from_descriptor(d["alpha"], "control"),
            beta=function_from_descriptor(d["beta"], "control"),
        )


@dataclass
class FunctionCertificate:
    grid: dict
    margins: dict
    passed: bool
    analytic: bool
    failures: list = field(default_factory=list)
    caveats: list = field(default_factory=list)

    def to_dict(self):
        return {
            "grid": self.grid,
            "margins": self.margins,
            "passed": self.passed,
            "analytic": self.analytic,
            "failures": list(self.failures),
            "caveats": list(self.caveats),
        }


def default_grid(diameter: float, points: int = DEFAULT_GRID_POINTS) -> list[float]:
    if not diameter > 0:
        raise ValueError("diameter must be positive")
    return [float(t) for t in np.linspace(0.0, diameter, points)]


def _describe_grid(grid: Sequence[float]) -> dict:
    return {"start": grid[0], "stop": grid[-1], "points": len(grid)}


def _check_grid(grid: Sequence[float], must_start_at_zero: bool):
    if len(grid) == 0:
        raise ValueError("grid is empty")
    if must_start_at_zero and grid[0] != 0.0:
        raise ValueError("grid must start at 0")
    if grid[0] < 0:
        raise ValueError("grid must be nonnegative")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")


def _call(f, t: float, name: str) -> float:
    try:
        v = float(f(t))
    except (ExprError, ArithmeticError) as exc:
        raise FunctionEvalError(name, t, exc) from None
    if not math.isfinite(v):
        raise FunctionEvalError(name, t, ValueError(f"non-finite value {v!r}"))
    return v


def check_altering_distance(psi, grid: Sequence[float]) -> FunctionCertificate:
    """Check that ``psi`` vanishes exactly at 0 and is nondecreasing on ``grid``.

    ``positivity`` (min of psi over the positive grid points) must be strictly
    positive; ``monotonicity`` (min increment between neighbours) must be
    nonnegative, since a nondecreasing function may be flat. ``max_slope``
    is reported as a continuity hint only.
    """
    grid = [float(t) for t in grid]
    _check_grid(grid, must_start_at_zero=True)
    values = [_call(psi, t, "psi") for t in grid]
    failures = []
    if values[0] != 0.0:
        failures.append(f"psi(0) = {values[0]!r}, expected 0")
    positivity = min(values[1:]) if len(values) > 1 else math.inf
    if positivity <= 0.0:
        t_bad = next(t for t, v in zip(grid[1:], values[1:]) if v <= 0.0)
        failures.append(f"psi({t_bad!r}) <= 0 at a positive argument")
    steps = [b - a for a, b in zip(values, values[1:])]
    monotonicity = min(steps) if steps else 0.0
    if monotonicity < 0.0:
        i = steps.index(monotonicity)
        failures.append(f"psi decreases between t={grid[i]!r} and t={grid[i + 1]!r}")
    max_slope = max((abs(s) / (b - a) for s, a, b in zip(steps, grid, grid[1:])), default=0.0)
    analytic = bool(getattr(psi, "analytic", False))
    caveats = []
    if not analytic:
        caveats.append("continuity is not proved; max_slope is the largest finite-difference slope on the grid")
        caveats.append("monotonicity and positivity are checked on grid points only")
    margins = {
        "psi_at_zero": values[0],
        "positivity": positivity if math.isfinite(positivity) else None,
        "monotonicity": monotonicity,
        "max_slope": max_slope,
    }
    return FunctionCertificate(_describe_grid(grid), margins, not failures, analytic, failures, caveats)


def _right_limsup(f, t: float, delta: float, probes: int) -> float:
    """Upper estimate of limsup_{s -> t+} f(s) from probes t + delta / 2^j."""
    return max(f(t + delta / 2.0 ** j) for j in range(probes))


def check_control_pair(
    alpha,
    beta,
    grid: Sequence[float],
    delta: float = DEFAULT_DELTA,
    probes: int = DEFAULT_PROBES,
) -> FunctionCertificate:
    """Check alpha, beta against the pointwise and one-sided limsup conditions.

    Pointwise on ``grid``: 0 <= alpha < 1, 0 <= beta < 1, alpha + beta < 1.
    Limsup: beta at 0+ and alpha / (1 - beta) at t+ for every positive grid
    point. For two constants both limsups are exact; otherwise they are
    estimated as the maximum over ``probes`` offsets delta, delta/2, ....
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if probes < 2:
        raise ValueError("probes must be at least 2")
    grid = [float(t) for t in grid]
    _check_grid(grid, must_start_at_zero=False)
    failures = []

    a_vals = [_call(alpha, t, "alpha") for t in grid]
    b_vals = [_call(beta, t, "beta") for t in grid]
    for t, a, b in zip(grid, a_vals, b_vals):
        if not 0.0 <= a < 1.0:
            failures.append(f"alpha({t!r}) = {a!r} outside [0, 1)")
        if not 0.0 <= b < 1.0:
            failures.append(f"beta({t!r}) = {b!r} outside [0, 1)")
    sum_margin = min(1.0 - (a + b) for a, b in zip(a_vals, b_vals))
    if sum_margin <= 0.0:
        t_bad = next(t for t, a, b in zip(grid, a_vals, b_vals) if a + b >= 1.0)
        failures.append(f"alpha + beta >= 1 at t={t_bad!r}")

    analytic = isinstance(alpha, Constant) and isinstance(beta, Constant)
    caveats = []
    beta_limsup = ratio_limsup = None
    if analytic:
        beta_limsup = beta.c
        ratio_limsup = alpha.c / (1.0 - beta.c) if beta.c < 1.0 else math.inf
    else:
        caveats.append(
            f"limsup conditions estimated from {probes} right-sided probes in (t, t+{delta!r}]; not a proof"
        )
        beta_limsup = _right_limsup(lambda s: _call(beta, s, "beta"), 0.0, delta, probes)

        def ratio(s):
            b = _call(beta, s, "beta")
            if b >= 1.0:
                raise ZeroDivisionError(s)
            return _call(alpha, s, "alpha") / (1.0 - b)

        ratio_limsup = -math.inf
        for t in [0.0] + [t for t in grid if t > 0.0]:
            try:
                est = _right_limsup(ratio, t, delta, probes)
            except ZeroDivisionError as exc:
                failures.append(f"denominator vanishes: beta(s) >= 1 at s={exc.args[0]!r}")
                ratio_limsup = math.inf
                break
            ratio_limsup = max(ratio_limsup, est)

    if not 1.0 - beta_limsup > REQUIRED_MARGIN:
        failures.append(f"limsup of beta at 0+ is {beta_limsup!r}, not below 1")
    if not 1.0 - ratio_limsup > REQUIRED_MARGIN:
        failures.append(f"limsup of alpha/(1-beta) reaches {ratio_limsup!r}, not below 1")

    margins = {
        "sum": sum_margin,
        "beta_limsup_at_zero": beta_limsup,
        "ratio_limsup": ratio_limsup if math.isfinite(ratio_limsup) else None,
    }
    grid_desc = _describe_grid(grid)
    grid_desc.update(delta=delta, probes=probes)
    return FunctionCertificate(grid_desc, margins, not failures, analytic, failures, caveats)
