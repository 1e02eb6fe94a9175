"""Brute-force ground truth on finite metric spaces.

Sequence-based notions become decidable on a finite space. A convergent
sequence in a finite metric space is eventually constant, so if
``S x_n -> t`` and ``T x_n -> t`` then every value ``x`` that the sequence
takes infinitely often satisfies ``S x = T x = t``. Hence

* property (E.A.) holds iff the coincidence set C(S, T) is nonempty
  (the constant sequence at a coincidence point is a witness);
* the pair is compatible iff S T x = T S x for every x in C(S, T), and
  noncompatible iff some x in C(S, T) has S T x != T S x.

Theorem checks are implications: a conclusion failing only counts as a
falsification when every premise verifiably holds.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .contraction_pair import SelfMapPair, certify_finite
from .control_functions import (
    Constant,
    ControlTriple,
    Identity,
    Power,
    Saturating,
    check_altering_distance,
    check_control_pair,
    default_grid,
)
from .jungck_solver import ContradictionError, check_inclusion, extract_poc, iterate
from .metric_core import FiniteMetricSpace, random_planar_space

__all__ = [
    "GenerationError",
    "TheoremVerdict",
    "OracleReport",
    "Instance",
    "coincidence_points",
    "pocs",
    "common_fixed_points",
    "is_owc",
    "is_compatible_finite",
    "has_property_ea_finite",
    "contraction_premise",
    "verify_theorems",
    "oracle_report",
    "generate_instance",
    "run_campaign",
    "STRATEGIES",
    "REJECTION_BUDGET",
]

STRATEGIES = ("random", "constant-S", "rejection-certified")
REJECTION_BUDGET = 100_000

PASS, VACUOUS, FALSIFIED = "pass", "vacuous", "FALSIFIED"


class GenerationError(RuntimeError):
    pass


def coincidence_points(pair: SelfMapPair, space: FiniteMetricSpace) -> list[int]:
    return [x for x in space.points() if pair.S[x] == pair.T[x]]


def pocs(pair: SelfMapPair, space: FiniteMetricSpace) -> list[int]:
    return sorted({pair.S[x] for x in coincidence_points(pair, space)})


def common_fixed_points(pair: SelfMapPair, space: FiniteMetricSpace) -> list[int]:
    return [x for x in space.points() if pair.S[x] == x and pair.T[x] == x]


def _commutes(pair: SelfMapPair, x: int) -> bool:
    return pair.S[pair.T[x]] == pair.T[pair.S[x]]


def is_owc(pair: SelfMapPair, space: FiniteMetricSpace) -> tuple[bool, int | None]:
    """(owc, witness): some coincidence point where S and T commute."""
    for x in coincidence_points(pair, space):
        if _commutes(pair, x):
            return True, x
    return False, None


def is_compatible_finite(pair: SelfMapPair, space: FiniteMetricSpace) -> tuple[bool, bool]:
    cps = coincidence_points(pair, space)
    compatible = all(_commutes(pair, x) for x in cps)
    return compatible, not compatible


def has_property_ea_finite(pair: SelfMapPair, space: FiniteMetricSpace) -> bool:
    return bool(coincidence_points(pair, space))


@dataclass
class TheoremVerdict:
    theorem: str
    premises: dict
    premises_held: bool
    conclusion_held: bool | None
    verdict: str
    detail: str = ""

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "premises": dict(self.premises),
            "premises_held": self.premises_held,
            "conclusion_held": self.conclusion_held,
            "verdict": self.verdict,
            "detail": self.detail,
        }


def _verdict(theorem, premises, conclusion, detail="") -> TheoremVerdict:
    held = all(premises.values())
    if not held:
        return TheoremVerdict(theorem, premises, False, conclusion, VACUOUS, detail)
    return TheoremVerdict(theorem, premises, True, conclusion, PASS if conclusion else FALSIFIED, detail)


@dataclass
class ContractionPremise:
    holds: bool
    psi_certificate: object
    control_certificate: object
    certification: object


def contraction_premise(pair: SelfMapPair, triple: ControlTriple, space: FiniteMetricSpace) -> ContractionPremise:
    """psi, alpha, beta admissible on the space's scale and the inequality holding at all pairs."""
    grid = default_grid(space.diameter())
    psi_cert = check_altering_distance(triple.psi, grid)
    ctl_cert = check_control_pair(triple.alpha, triple.beta, grid)
    report = certify_finite(pair, triple, space)
    return ContractionPremise(psi_cert.passed and ctl_cert.passed and report.certified, psi_cert, ctl_cert, report)


def _solver_check(pair, triple, space, poc_list) -> tuple[bool, str]:
    """Every start converges within 4n steps to the unique POC, with descending gaps."""
    if len(poc_list) != 1:
        return False, f"expected one POC, found {len(poc_list)}"
    w = poc_list[0]
    psi = triple.psi
    for x0 in space.points():
        trace = iterate(pair, space, x0, max_iter=4 * space.n)
        label = space.labels[x0]
        if trace.status != "converged":
            return False, f"start {label}: {trace.status}"
        gaps = trace.gaps
        for a, b in zip(gaps, gaps[1:]):
            if b > a:
                return False, f"start {label}: gap increased {a!r} -> {b!r}"
            if a > 0.0 and not psi(b) < psi(a):
                return False, f"start {label}: psi(gap) did not strictly decrease at {a!r} -> {b!r}"
        if trace.z != w:
            return False, f"start {label}: limit {space.labels[trace.z]} differs from POC {space.labels[w]}"
        try:
            extract_poc(trace, pair, space)
        except ContradictionError as exc:
            return False, f"start {label}: {exc}"
    return True, ""


@dataclass
class OracleReport:
    labels: tuple
    coincidence_points: list
    pocs: list
    owc: bool
    owc_witness: int | None
    compatible: bool
    noncompatible: bool
    ea: bool
    common_fixed_points: list
    inclusion: bool
    contraction: bool
    theorem_verdicts: list = field(default_factory=list)

    @property
    def falsified(self) -> list:
        return [v for v in self.theorem_verdicts if v.verdict == FALSIFIED]

    def to_dict(self):
        lbl = lambda xs: [self.labels[x] for x in xs]  # noqa: E731
        return {
            "coincidence_points": lbl(self.coincidence_points),
            "pocs": lbl(self.pocs),
            "owc": self.owc,
            "owc_witness": self.labels[self.owc_witness] if self.owc_witness is not None else None,
            "compatible": self.compatible,
            "noncompatible": self.noncompatible,
            "ea": self.ea,
            "common_fixed_points": lbl(self.common_fixed_points),
            "inclusion": self.inclusion,
            "contraction": self.contraction,
            "theorem_verdicts": [v.to_dict() for v in self.theorem_verdicts],
        }


def verify_theorems(pair: SelfMapPair, triple: ControlTriple, space: FiniteMetricSpace) -> list[TheoremVerdict]:
    return oracle_report(pair, triple, space).theorem_verdicts


def oracle_report(pair: SelfMapPair, triple: ControlTriple, space: FiniteMetricSpace) -> OracleReport:
    pair.check_finite(space)
    cps = coincidence_points(pair, space)
    poc_list = pocs(pair, space)
    owc, witness = is_owc(pair, space)
    compatible, noncompatible = is_compatible_finite(pair, space)
    ea = has_property_ea_finite(pair, space)
    cfp = common_fixed_points(pair, space)
    inclusion = check_inclusion(pair, space).holds
    contraction = contraction_premise(pair, triple, space).holds

    verdicts = [
        _verdict("poc-uniqueness", {"contraction": contraction}, len(poc_list) <= 1,
                 f"{len(poc_list)} POC(s)"),
        _verdict("unique-poc", {"inclusion": inclusion, "contraction": contraction}, len(poc_list) == 1,
                 f"{len(poc_list)} POC(s)"),
        _verdict("common-fixed-point", {"inclusion": inclusion, "contraction": contraction, "owc": owc},
                 len(cfp) == 1 and cfp == poc_list, f"{len(cfp)} common fixed point(s)"),
        _verdict("ea-owc-fixed-point", {"owc": owc, "ea": ea, "contraction": contraction},
                 len(cfp) == 1, f"{len(cfp)} common fixed point(s)"),
        _verdict("noncompatible-implies-ea", {"noncompatible": noncompatible}, ea),
    ]
    premises = {"inclusion": inclusion, "contraction": contraction}
    if all(premises.values()):
        ok, detail = _solver_check(pair, triple, space, poc_list)
        verdicts.append(_verdict("jungck-convergence", premises, ok, detail))
    else:
        verdicts.append(_verdict("jungck-convergence", premises, None))

    return OracleReport(space.labels, cps, poc_list, owc, witness, compatible, noncompatible, ea, cfp,
                        inclusion, contraction, verdicts)


@dataclass
class Instance:
    seed: int
    n: int
    strategy: str
    space: FiniteMetricSpace
    pair: SelfMapPair
    triple: ControlTriple
    attempts: int = 1


def _random_triple(rng: np.random.Generator) -> ControlTriple:
    total = rng.uniform(0.0, 1.0)
    share = rng.uniform(0.0, 1.0)
    psi = (Identity(), Power(2.0), Saturating())[int(rng.integers(3))]
    return ControlTriple(psi, Constant(total * share), Constant(total * (1.0 - share)))


def _random_instance(rng, n):
    space = random_planar_space(rng, n)
    S = rng.integers(0, n, n)
    T = rng.integers(0, n, n)
    return space, SelfMapPair(S, T), _random_triple(rng)


def generate_instance(seed: int, n: int, strategy: str, budget: int = REJECTION_BUDGET) -> Instance:
    """Deterministic instance from ``seed``.

    ``random`` draws a planar space, uniform map arrays and constant controls.
    ``constant-S`` makes S constant at a point of T(M). ``rejection-certified``
    redraws ``random`` instances until the inequality holds at every pair.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    rng = np.random.default_rng([seed, n, STRATEGIES.index(strategy)])
    if strategy == "random":
        return Instance(seed, n, strategy, *_random_instance(rng, n))
    if strategy == "constant-S":
        space = random_planar_space(rng, n)
        T = rng.integers(0, n, n)
        a = int(T[rng.integers(n)])
        return Instance(seed, n, strategy, space, SelfMapPair([a] * n, T), _random_triple(rng))
    drawn = 0
    while drawn < budget:
        batch = min(REJECTION_BATCH, budget - drawn)
        cand = _draw_batch(rng, n, batch)
        for b in np.flatnonzero(_batch_passes(cand)):
            inst = _materialize(cand, int(b))
            if inst is None:
                continue
            space, pair, triple = inst
            if certify_finite(pair, triple, space).certified:
                return Instance(seed, n, strategy, space, pair, triple, drawn + int(b) + 1)
        drawn += batch
    raise GenerationError(f"seed {seed}: no certified instance in {budget} attempts (n={n})")


# Rejection sampling draws candidates in blocks and screens them with numpy;
# the first survivor is re-checked by the scalar certifier before emission.
REJECTION_BATCH = 256
_PSI_FAMILIES = (Identity(), Power(2.0), Saturating())


def _draw_batch(rng, n, batch) -> dict:
    pts = rng.random((batch, n, 2))
    S = rng.integers(0, n, (batch, n))
    T = rng.integers(0, n, (batch, n))
    total = rng.uniform(0.0, 1.0, batch)
    share = rng.uniform(0.0, 1.0, batch)
    psi = rng.integers(0, 3, batch)
    diff = pts[:, :, None, :] - pts[:, None, :, :]
    D = np.hypot(diff[..., 0], diff[..., 1])
    D = np.minimum(D, np.swapaxes(D, 1, 2))
    return {"D": D, "S": S, "T": T, "alpha": total * share, "beta": total * (1.0 - share), "psi": psi}


def _batch_passes(c) -> np.ndarray:
    D, S, T = c["D"], c["S"], c["T"]
    B = np.arange(D.shape[0])[:, None, None]
    d_ss = D[B, S[:, :, None], S[:, None, :]]
    d_tt = D[B, T[:, :, None], T[:, None, :]]
    d_st = D[np.arange(D.shape[0])[:, None], S, T]
    m = np.maximum(d_st[:, None, :] * (1.0 + d_st[:, :, None]) / (1.0 + d_tt), d_tt)
    ok = np.zeros(D.shape[0], dtype=bool)
    a, b = c["alpha"][:, None, None], c["beta"][:, None, None]
    for k, psi in enumerate(_PSI_FAMILIES):
        slack = a * psi(d_tt) + b * psi(m) - psi(d_ss)
        ok |= (c["psi"] == k) & np.all(slack >= 0.0, axis=(1, 2))
    return ok


def _materialize(c, b):
    try:
        space = FiniteMetricSpace(c["D"][b].tolist())
    except ValueError:
        return None
    pair = SelfMapPair(c["S"][b], c["T"][b])
    triple = ControlTriple(
        _PSI_FAMILIES[int(c["psi"][b])], Constant(float(c["alpha"][b])), Constant(float(c["beta"][b]))
    )
    return space, pair, triple


# -- fuzz campaigns ---------------------------------------------------------

COMBOS = ("owc+ea", "owc+not-ea", "not-owc+ea", "not-owc+not-ea")


def _combo(owc: bool, ea: bool) -> str:
    return ("owc" if owc else "not-owc") + "+" + ("ea" if ea else "not-ea")


def _n_for(seed: int, n_range: tuple[int, int]) -> int:
    lo, hi = n_range
    return lo + seed % (hi - lo + 1)


def _run_one(args) -> dict:
    seed, n_range, strategy, budget = args
    n = _n_for(seed, n_range)
    try:
        inst = generate_instance(seed, n, strategy, budget)
    except GenerationError as exc:
        return {"seed": seed, "n": n, "generation_failure": str(exc)}
    report = oracle_report(inst.pair, inst.triple, inst.space)
    return {
        "seed": seed,
        "n": n,
        "attempts": inst.attempts,
        "contraction": report.contraction,
        "inclusion": report.inclusion,
        "combo": _combo(report.owc, report.ea),
        "remark_exception": report.noncompatible and not report.ea,
        "pocs": len(report.pocs),
        "verdicts": [(v.theorem, v.verdict, v.detail) for v in report.theorem_verdicts],
    }


def workers_from_env(default: int = 1) -> int:
    raw = os.environ.get("JUNGCK_WORKERS", "")
    try:
        return max(1, int(raw)) if raw else default
    except ValueError:
        return default


@dataclass
class CampaignSummary:
    seeds: tuple
    n: tuple
    strategy: str
    instances: int
    certified: int
    certified_with_inclusion: int
    generation_failures: list
    verdict_counts: dict
    combos: dict
    combos_not_found: list
    remark_exceptions: list
    falsifications: list
    max_pocs_certified: int

    def to_dict(self):
        return {
            "seeds": list(self.seeds),
            "n": list(self.n),
            "strategy": self.strategy,
            "instances": self.instances,
            "certified": self.certified,
            "certified_with_inclusion": self.certified_with_inclusion,
            "generation_failures": self.generation_failures,
            "verdict_counts": self.verdict_counts,
            "owc_ea_combinations": self.combos,
            "combinations_not_found": self.combos_not_found,
            "remark_exceptions": self.remark_exceptions,
            "falsifications": self.falsifications,
            "max_pocs_certified": self.max_pocs_certified,
        }


def run_campaign(
    seeds: range,
    n_range: tuple[int, int],
    strategy: str,
    workers: int | None = None,
    budget: int = REJECTION_BUDGET,
) -> CampaignSummary:
    """Generate and check one instance per seed; aggregation is ordered by seed."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    lo, hi = n_range
    if lo < 2 or hi < lo:
        raise ValueError(f"bad n range {n_range}")
    workers = workers_from_env() if workers is None else max(1, workers)
    jobs = [(s, n_range, strategy, budget) for s in seeds]
    if workers == 1 or len(jobs) < 2:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    results.sort(key=lambda r: r["seed"])

    verdict_counts: dict = {}
    combos = {c: 0 for c in COMBOS}
    failures, remark, falsified = [], [], []
    certified = with_inclusion = 0
    max_pocs = 0
    for r in results:
        if "generation_failure" in r:
            failures.append({"seed": r["seed"], "n": r["n"], "reason": r["generation_failure"]})
            continue
        certified += r["contraction"]
        with_inclusion += r["contraction"] and r["inclusion"]
        if r["contraction"]:
            max_pocs = max(max_pocs, r["pocs"])
        combos[r["combo"]] += 1
        if r["remark_exception"]:
            remark.append(r["seed"])
        for theorem, verdict, detail in r["verdicts"]:
            counts = verdict_counts.setdefault(theorem, {PASS: 0, VACUOUS: 0, FALSIFIED: 0})
            counts[verdict] += 1
            if verdict == FALSIFIED:
                falsified.append({"seed": r["seed"], "n": r["n"], "theorem": theorem, "detail": detail})
    return CampaignSummary(
        (seeds.start, seeds.stop - 1),
        (lo, hi),
        strategy,
        len(results) - len(failures),
        certified,
        with_inclusion,
        failures,
        {k: verdict_counts[k] for k in sorted(verdict_counts)},
        combos,
        [c for c in COMBOS if combos[c] == 0],
        remark,
        falsified,
        max_pocs,
    )
