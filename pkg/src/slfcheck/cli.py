"""``slfcheck`` command line.

Exit codes: 0 success, 1 a checked invariant failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .core import ModelError, dumps, infer_instance, instance_from_dict, rat, rat_to_json, trace_from_dict, trace_to_dict, validate_trace
from .gantt import frozen_onsets, render_svg
from .generators import CSV_COLUMNS, Family, GenSpec, format_cell, sweep
from .opt import brute_force_opt_flow, simulate_srpt
from .proof.battery import report_for_target, run_battery
from .proof.checks import CheckReport
from .proof.context import Timeline, make_context
from .slf import simulate_slf

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load_json(path: str, what: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {what} file {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} file {path} is not valid JSON: {exc}") from None


def _load_instance(args):
    return instance_from_dict(_load_json(args.instance, "instance"), args.epsilon)


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _epsilon(text: str):
    try:
        return rat(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"epsilon must look like NUM/DEN, got {text!r}") from None


def cmd_simulate(args) -> int:
    inst = _load_instance(args)
    trace = simulate_slf(inst) if args.algo == "slf" else simulate_srpt(inst)
    data = trace_to_dict(trace)
    data["flow_time"] = rat_to_json(trace.total_flow_time())
    _emit(args, dumps(data))
    return EXIT_OK


def _override(args, inst):
    if not args.trace_override:
        return None, None
    alg = trace_from_dict(_load_json(args.trace_override, "trace"), inst, validate=False)
    try:
        validate_trace(alg)
    except ModelError as exc:
        return None, CheckReport("trace_feasibility", False, None, {}, str(exc))
    return alg, None


def cmd_verify(args) -> int:
    inst = _load_instance(args)
    alg, broken = _override(args, inst)
    if broken is not None:
        result_reports, summary, decomposition = [broken], {broken.check: {"passed": 0, "failed": 1}}, {}
        passed = False
    else:
        target = args.target
        if target in ("all", "final"):
            res = run_battery(inst, target if len(inst) <= 20 or target == "final" else "final", alg=alg)
            final = max(res.decompositions, default=None)
            decomposition = {str(final): [str(iv) for iv in res.decompositions[final]]} if final is not None else {}
            result_reports = res.failures
        else:
            t = rat(target)
            res = report_for_target(inst, t, alg=alg)
            decomposition = {str(t): [str(iv) for iv in res.decompositions.get(t, [])]}
            result_reports = res.reports
        summary, passed = res.summary(), res.passed
    report = {
        "pass": passed,
        "epsilon": rat_to_json(inst.epsilon),
        "target": args.target,
        "summary": summary,
        "decomposition": decomposition,
        "checks": [r.to_dict() for r in result_reports],
    }
    _emit(args, dumps(report))
    if not passed:
        first = next(r for r in result_reports if not r.passed)
        w = first.to_dict()["witness"]
        print(f"FAIL {first.check}: {first.details} (witness {json.dumps(w, sort_keys=True)})", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_sweep(args) -> int:
    families = args.family or [f.value for f in Family]
    seeds = [args.seed + k for k in range(args.count)]
    specs = [GenSpec(Family(f), n, args.max_size, args.max_release, s)
             for f in families for n in args.n for s in seeds]
    rows = sweep(specs, args.epsilon or [rat("1/2")], targets=args.targets, workers=args.workers)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in rows:
            w.writerow([format_cell(row[c]) for c in CSV_COLUMNS])
        _emit(args, buf.getvalue())
    else:
        _emit(args, dumps({"rows": [{c: format_cell(row[c]) if c != "checks_passed" else row[c]
                                     for c in CSV_COLUMNS} for row in rows]}))
    return EXIT_OK if all(r["checks_passed"] for r in rows) else EXIT_VIOLATION


def cmd_oracle(args) -> int:
    inst = _load_instance(args)
    f_srpt = simulate_srpt(inst).total_flow_time()
    f_dp = brute_force_opt_flow(inst)
    print(f"flow(SRPT) = {f_srpt}")
    print(f"flow(DP)   = {f_dp}")
    if f_srpt != f_dp:
        print("MISMATCH", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_gantt(args) -> int:
    data = _load_json(args.trace, "trace")
    if args.instance:
        inst = instance_from_dict(_load_json(args.instance, "instance"), args.epsilon)
    else:
        inst = infer_instance(data, args.epsilon if args.epsilon is not None else 1)
    trace = trace_from_dict(data, inst)
    known = frozen = None
    if args.epsilon is not None or args.instance:
        tl = Timeline(trace, trace, inst.epsilon)
        known = tl.known_time if inst.epsilon < 1 else {}
        if args.target is not None:
            frozen = frozen_onsets(make_context(inst, rat(args.target), timeline=tl))
    _emit(args, render_svg(trace, known, frozen))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slfcheck", description="Simulate SLF and SRPT and check the flow-time analysis.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("instance", help="instance JSON file, or - for stdin")
        sp.add_argument("--epsilon", type=_epsilon, help="override epsilon, as NUM/DEN")
        sp.add_argument("--out", help="write output here instead of stdout")

    sp = sub.add_parser("simulate", help="write the trace of SLF or SRPT")
    common(sp)
    sp.add_argument("--algo", choices=("slf", "srpt"), default="slf")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="run every checker")
    common(sp)
    sp.add_argument("--target", default="all", help="all, final, or a rational time")
    sp.add_argument("--trace-override", help="check this SLF trace instead of simulating")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep", help="ratio and checker sweep over generated instances")
    sp.add_argument("--out")
    sp.add_argument("--epsilon", type=_epsilon, action="append", help="NUM/DEN, repeatable; default 1/2")
    sp.add_argument("--family", action="append", choices=[f.value for f in Family])
    sp.add_argument("--n", type=int, action="append", help="jobs per instance, repeatable; default 8")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=10, help="seeds per family and size")
    sp.add_argument("--max-size", type=int, default=10)
    sp.add_argument("--max-release", type=int, default=10)
    sp.add_argument("--targets", choices=("all", "final"), default="final")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--format", choices=("json", "csv"), default="csv")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("oracle", help="compare SRPT against exhaustive search")
    common(sp)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("gantt", help="render a trace as SVG")
    sp.add_argument("trace")
    sp.add_argument("--instance", help="instance file, for exact releases and sizes")
    sp.add_argument("--epsilon", type=_epsilon)
    sp.add_argument("--target", help="also mark frozen onsets for this target")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gantt)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "sweep" and not args.n:
        args.n = [8]
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except ModelError as exc:
        where = f" (field '{exc.field_name}')" if exc.field_name else ""
        print(f"error: {exc}{where}", file=sys.stderr)
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
