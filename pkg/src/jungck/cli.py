"""Command-line entry point.

Exit codes: 0 success, 1 negative verdict, 2 malformed input, 3 capability
error (for example no way to invert T).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import demos, instance
from .contraction_pair import MapDomainError, certify_finite, certify_sampled
from .control_functions import (
    FunctionEvalError,
    check_altering_distance,
    check_control_pair,
    default_grid,
)
from .finite_oracle import STRATEGIES, generate_instance, oracle_report, run_campaign
from .instance import InstanceError
from .jungck_solver import CapabilityError, ContradictionError, check_inclusion, extract_poc, iterate
from .metric_core import FiniteMetricSpace, MetricAxiomError, MetricStructureError, validate_metric

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_CAPABILITY = 0, 1, 2, 3
TEXT_TRACE_ROWS = 60


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, tuples become lists."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _parse_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        a = int(lo)
        b = int(hi) if sep else a
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or A..B, got {text!r}") from None
    if b < a:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return a, b


class Reporter:
    def __init__(self, fmt: str, out=None):
        self.fmt = fmt
        self.out = out or sys.stdout

    def emit(self, command: str, code: int, body: dict, lines: list[str]):
        verdict = {EXIT_OK: "pass", EXIT_NEGATIVE: "fail"}.get(code, "error")
        if self.fmt == "machine":
            doc = {"command": command, "verdict": verdict, "exit_code": code, **body}
            self.out.write(json.dumps(_clean(doc), indent=2, sort_keys=True, allow_nan=False) + "\n")
        else:
            for line in lines:
                self.out.write(line + "\n")
            self.out.write(f"verdict: {verdict} (exit {code})\n")
        return code


def _fmt(v):
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def _cert_lines(name, cert):
    status = "pass" if cert.passed else "FAIL"
    kind = "analytic" if cert.analytic else "sampled"
    margins = ", ".join(f"{k}={_fmt(v)}" for k, v in cert.margins.items())
    lines = [f"{name}: {status} ({kind}; {margins})"]
    lines += [f"  failure: {f}" for f in cert.failures]
    lines += [f"  caveat: {c}" for c in cert.caveats]
    return lines


def _function_certificates(doc, diameter):
    triple = instance.triple_from(doc)
    grid = default_grid(diameter)
    return check_altering_distance(triple.psi, grid), check_control_pair(triple.alpha, triple.beta, grid)


def cmd_validate(args, rep: Reporter) -> int:
    doc = instance.load(args.instance)
    body: dict = {}
    lines: list[str] = []
    ok = True
    sec = doc.get("space", {})
    if isinstance(sec, dict) and sec.get("type", "finite") == "finite":
        matrix, labels = instance.finite_matrix(doc)
        violations = validate_metric(matrix)
        if len(labels) != len(matrix):
            raise InstanceError(f"{len(labels)} labels for {len(matrix)} points")
        body["metric"] = {"valid": not violations, "violations": [v.to_dict() for v in violations]}
        lines.append(f"metric: {'valid' if not violations else 'INVALID'} ({len(matrix)} points)")
        lines += [f"  violation: {v}" for v in violations]
        ok &= not violations
        diameter = max(max(float(v) for v in row) for row in matrix)
    else:
        space = instance.space_from(doc)
        body["metric"] = {"valid": True, "violations": []}
        lines.append(f"metric: valid (Euclidean box, dimension {space.dimension})")
        diameter = space.diameter()
    if "controls" in doc:
        if not diameter > 0:
            raise InstanceError("space has zero diameter")
        psi_cert, ctl_cert = _function_certificates(doc, diameter)
        body["psi_certificate"] = psi_cert.to_dict()
        body["control_certificate"] = ctl_cert.to_dict()
        lines += _cert_lines("psi", psi_cert) + _cert_lines("alpha/beta", ctl_cert)
        ok &= psi_cert.passed and ctl_cert.passed
    return rep.emit("validate", EXIT_OK if ok else EXIT_NEGATIVE, body, lines)


def _certify(doc, space, pair, triple, args):
    if isinstance(space, FiniteMetricSpace):
        return certify_finite(pair, triple, space)
    return certify_sampled(pair, triple, space, args.samples, args.seed)


def _report_lines(report):
    lines = [
        f"certification ({report.mode}): {'certified' if report.certified else 'NOT certified'}",
        f"  pairs checked: {report.pairs_checked}",
        f"  min slack: {_fmt(report.min_slack)} at {report.min_slack_at}",
        f"  violations: {report.violation_count}",
    ]
    for v in report.violations[:10]:
        lines.append(f"    x={v['x']} y={v['y']} lhs={_fmt(v['lhs'])} rhs={_fmt(v['rhs'])}")
    if report.mode == "sampled":
        lines.append("  note: sampled certification is evidence, not proof")
    return lines


def cmd_certify(args, rep: Reporter) -> int:
    doc = instance.load(args.instance)
    space = instance.space_from(doc)
    pair = instance.pair_from(doc, space)
    triple = instance.triple_from(doc)
    report = _certify(doc, space, pair, triple, args)
    return rep.emit("certify", EXIT_OK if report.certified else EXIT_NEGATIVE,
                    {"certification": report.to_dict()}, _report_lines(report))


def cmd_solve(args, rep: Reporter) -> int:
    doc = instance.load(args.instance)
    space = instance.space_from(doc)
    pair = instance.pair_from(doc, space)
    solver = instance.solver_from(doc, space, args.x0, args.tol, args.max_iter)
    body: dict = {"solver": {"tol": solver["tol"], "max_iter": solver["max_iter"]}}
    lines = []
    if "controls" in doc:
        report = _certify(doc, space, pair, instance.triple_from(doc), args)
        body["certified"] = report.certified
        lines.append(f"contraction certified ({report.mode}): {report.certified}")
    else:
        body["certified"] = None
        lines.append("contraction not checked (no controls section); run is uncertified")
    trace = iterate(pair, space, solver["x0"], solver["tol"], solver["max_iter"])
    body["trace"] = trace.to_dict(space)
    finite = isinstance(space, FiniteMetricSpace)
    show = (lambda p: space.labels[p]) if finite else _fmt
    lines.append(f"{'n':>5}  {'x_n':>14}  {'y_n':>14}  {'gap':>12}")
    steps = trace.steps
    if len(steps) > TEXT_TRACE_ROWS:
        head, tail = steps[: TEXT_TRACE_ROWS - 5], steps[-5:]
    else:
        head, tail = steps, []
    for s in head:
        gap = "" if s.gap is None else _fmt(s.gap)
        lines.append(f"{s.n:>5}  {show(s.x):>14}  {show(s.y):>14}  {gap:>12}")
    if tail:
        lines.append(f"  ... {len(steps) - len(head) - len(tail)} rows elided (machine format has all) ...")
        for s in tail:
            gap = "" if s.gap is None else _fmt(s.gap)
            lines.append(f"{s.n:>5}  {show(s.x):>14}  {show(s.y):>14}  {gap:>12}")
    lines.append(f"status: {trace.status}" + (f" ({trace.message})" if trace.message else ""))
    code = EXIT_NEGATIVE
    if trace.status == "converged":
        try:
            u, z = extract_poc(trace, pair, space, solver["tol"])
            body["poc"] = {"u": show(u) if finite else u, "z": show(z) if finite else z}
            lines.append(f"coincidence point u = {show(u)}, point of coincidence z = {show(z)}")
            code = EXIT_OK
        except ContradictionError as exc:
            body["poc"] = None
            body["contradiction"] = str(exc)
            lines.append(f"contradiction: {exc}")
    return rep.emit("solve", code, body, lines)


def cmd_oracle(args, rep: Reporter) -> int:
    doc = instance.load(args.instance)
    space = instance.space_from(doc)
    if not isinstance(space, FiniteMetricSpace):
        raise CapabilityError("the oracle decides finite spaces only")
    pair = instance.pair_from(doc, space)
    triple = instance.triple_from(doc)
    report = oracle_report(pair, triple, space)
    lbl = lambda xs: "{" + ", ".join(space.labels[x] for x in xs) + "}"  # noqa: E731
    lines = [
        f"coincidence points: {lbl(report.coincidence_points)}",
        f"points of coincidence: {lbl(report.pocs)}",
        f"common fixed points: {lbl(report.common_fixed_points)}",
        f"owc: {report.owc}  ea: {report.ea}  compatible: {report.compatible}  noncompatible: {report.noncompatible}",
        f"inclusion: {report.inclusion}  contraction: {report.contraction}",
    ]
    for v in report.theorem_verdicts:
        lines.append(f"  {v.theorem:<26} {v.verdict:<9} {v.detail}")
    code = EXIT_NEGATIVE if report.falsified else EXIT_OK
    return rep.emit("oracle", code, {"oracle": report.to_dict()}, lines)


def cmd_fuzz(args, rep: Reporter) -> int:
    a, b = args.seeds
    summary = run_campaign(range(a, b + 1), args.n, args.strategy, workers=None)
    body = summary.to_dict()
    written = []
    if summary.falsifications and args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for seed, n in sorted({(f["seed"], f["n"]) for f in summary.falsifications}):
            inst = generate_instance(seed, n, args.strategy)
            name = f"falsification-{args.strategy}-seed{seed}-n{n}.json"
            instance.dump(instance.instance_dict(inst.space, inst.pair, inst.triple, {"x0": inst.space.labels[0]}),
                          out / name)
            written.append(name)
    body["reproduction_files"] = written
    lines = [
        f"fuzz {args.strategy} seeds {a}..{b} n {args.n[0]}..{args.n[1]}",
        f"  instances: {summary.instances}  certified: {summary.certified}"
        f"  certified with inclusion: {summary.certified_with_inclusion}",
        f"  generation failures: {len(summary.generation_failures)}",
        f"  owc/ea combinations: {summary.combos}",
        f"  combinations not found: {summary.combos_not_found or 'none'}",
        f"  remark exceptions (noncompatible without ea): {len(summary.remark_exceptions)}",
    ]
    for theorem, counts in summary.verdict_counts.items():
        lines.append(f"  {theorem:<26} " + "  ".join(f"{k}={v}" for k, v in counts.items()))
    for f in summary.falsifications:
        lines.append(f"  FALSIFIED {f['theorem']} seed={f['seed']} n={f['n']}: {f['detail']}")
    code = EXIT_NEGATIVE if summary.falsifications else EXIT_OK
    return rep.emit("fuzz", code, body, lines)


def cmd_demo(args, rep: Reporter) -> int:
    out = Path(args.out or "demo")
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "three-point.json": (*demos.three_point(), {"x0": "p2"}),
        "constant-s.json": (*demos.constant_s(), {"x0": "p3"}),
        "violating-pair.json": (*demos.violating_pair(), {"x0": "p0"}),
        "continuous.json": (*demos.continuous(), {"x0": 1.0, "tol": 1e-10, "max_iter": 10000}),
    }
    for name, (space, pair, triple, solver) in files.items():
        instance.dump(instance.instance_dict(space, pair, triple, solver), out / name)
    diag = demos.harmonic_diagnostics()
    (out / "harmonic-diagnostic.json").write_text(
        json.dumps(_clean(diag.to_dict()), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    names = sorted(list(files) + ["harmonic-diagnostic.json"])
    return rep.emit("demo", EXIT_OK, {"directory": str(out), "files": names},
                    [f"wrote {out / n}" for n in names])


def build_parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(prog="jungck", description="Certify, solve and oracle-check contraction pairs.")
    p.add_argument("--format", choices=("text", "machine"), default="text")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    common = _ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "machine"), default=argparse.SUPPRESS)

    sampling = _ArgumentParser(add_help=False)
    sampling.add_argument("--samples", type=int, default=10_000, help="sampled certification pairs")
    sampling.add_argument("--seed", type=int, default=0, help="sampled certification seed")

    s = sub.add_parser("validate", parents=[common], help="metric axioms and control functions")
    s.add_argument("instance")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("certify", parents=[common, sampling], help="check the contraction inequality")
    s.add_argument("instance")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("solve", parents=[common, sampling], help="run the Jungck iteration")
    s.add_argument("instance")
    s.add_argument("--tol", type=float)
    s.add_argument("--max-iter", type=int)
    s.add_argument("--x0")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("oracle", parents=[common], help="brute-force theorem verdicts")
    s.add_argument("instance")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("fuzz", parents=[common], help="seeded falsification campaign")
    s.add_argument("--seeds", type=_parse_range, default=(0, 99), metavar="A..B")
    s.add_argument("--n", type=_parse_range, default=(5, 5), metavar="N or A..B")
    s.add_argument("--strategy", choices=STRATEGIES, default="constant-S")
    s.add_argument("--out", help="directory for falsification instance files")
    s.set_defaults(func=cmd_fuzz)

    s = sub.add_parser("demo", parents=[common], help="write the built-in example instances")
    s.add_argument("--out", help="target directory (default ./demo)")
    s.set_defaults(func=cmd_demo)
    return p


def main(argv=None, out=None) -> int:
    args = build_parser().parse_args(argv)
    err = sys.stderr
    if getattr(args, "n", None) is not None and args.command == "fuzz" and args.n[0] < 2:
        err.write("jungck: error: --n must be at least 2\n")
        return EXIT_INPUT
    rep = Reporter(args.format, out)
    try:
        return args.func(args, rep)
    except (InstanceError, MetricStructureError, MetricAxiomError, MapDomainError, FunctionEvalError) as exc:
        err.write(f"jungck: input error: {exc}\n")
        return EXIT_INPUT
    except CapabilityError as exc:
        err.write(f"jungck: capability error: {exc}\n")
        return EXIT_CAPABILITY


if __name__ == "__main__":
    sys.exit(main())
