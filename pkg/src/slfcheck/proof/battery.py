"""Run every checker on one instance, for one or many target times."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from ..core import ZERO, Instance, Trace, rat
from .checks import (
    CheckReport,
    IdleWithinWindow,
    Kind,
    PreconditionViolated,
    check_decomposition,
    check_fast_forward_interval,
    check_freeze_event,
    check_local_competitiveness,
    check_slf_rules,
    check_suffix_carving_interval,
    check_volume_bound,
    decompose,
    freeze_events,
)
from .context import AnalysisContext, Side, Timeline, busy_start, make_context, top_volume


@dataclass
class BatteryResult:
    reports: list[CheckReport] = field(default_factory=list)
    decompositions: dict = field(default_factory=dict)
    counts: Counter = field(default_factory=Counter)
    max_local_ratio: Fraction | None = Fraction(0)

    def add(self, report: CheckReport) -> None:
        self.reports.append(report)
        self.counts[(report.check, report.passed)] += 1

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def failures(self) -> list[CheckReport]:
        return [r for r in self.reports if not r.passed]

    def summary(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for (name, ok), n in sorted(self.counts.items()):
            out.setdefault(name, {"passed": 0, "failed": 0})["passed" if ok else "failed"] += n
        return out


def _targets(tl: Timeline, targets) -> list[Fraction]:
    end = tl.alg.makespan
    if targets == "final":
        return [end] if end > 0 else []
    if targets == "all":
        return [s for s in tl.checkpoints(end).times if s > 0]
    return sorted({rat(t) for t in targets})


def volume_sweep(tl: Timeline, targets: list[Fraction]) -> CheckReport:
    """The volume bound for every target in ``targets`` at once.

    The bound at ``(t, t')`` depends on ``t`` only through ``OPT(t)``, so
    targets sharing that set are covered by the largest of them.
    """
    widest: dict[frozenset, Fraction] = {}
    for t in targets:
        key = tl.state(t).opt_active
        widest[key] = max(widest.get(key, t), t)
    c = tl.c
    count = 0
    times = tl.checkpoints(tl.alg.makespan).times if tl.alg.makespan > 0 else ()
    for opt_t, reach in sorted(widest.items(), key=lambda kv: kv[1]):
        cps = list(times) if reach in times else list(tl.checkpoints(reach).times)
        for s in cps:
            if s > reach:
                break
            for side in (Side.BEFORE, Side.AT) if s > 0 else (Side.AT,):
                st = tl.state(s, side)
                both = opt_t & st.opt_active
                b = top_volume(st.r, c * len(both))
                lhs = sum((st.r[j] for j in b), ZERO)
                rhs = sum((st.rstar[j] for j in both), ZERO)
                count += 1
                if lhs < rhs:
                    return CheckReport("volume_sweep", False, s, {"B": b, "OPT(t,t')": both},
                                       f"vol_B = {lhs} < vol* = {rhs} at {st.label()} for target {reach}")
    return CheckReport("volume_sweep", True, None, {},
                       f"{count} evaluations over {len(widest)} distinct OPT(t) sets", {"evaluations": count})


def _global_checks(tl: Timeline, out: BatteryResult) -> None:
    out.add(check_slf_rules(tl.alg))
    end = tl.alg.makespan
    ctx = make_context(tl.instance, end, timeline=tl)
    lc = check_local_competitiveness(ctx)
    out.max_local_ratio = lc.data.get("max_ratio")
    out.add(lc)
    bad = None
    for s in ctx.checkpoints().times:
        st = tl.state(s)
        a = sum(st.r.values(), ZERO)
        o = sum(st.rstar.values(), ZERO)
        if a != o:
            bad = (s, a, o)
            break
    out.add(CheckReport("volume_equality", bad is None, bad and bad[0], {},
                        "total remaining volume agrees" if bad is None
                        else f"SLF volume {bad[1]} != SRPT volume {bad[2]}"))
    ratio_ok = tl.alg.total_flow_time() <= tl.c * tl.opt.total_flow_time()
    out.add(CheckReport("flow_ratio", ratio_ok, None, {},
                        f"flow {tl.alg.total_flow_time()} vs {tl.c} * {tl.opt.total_flow_time()}"))


def check_target(ctx: AnalysisContext, out: BatteryResult) -> None:
    """Decompose the busy window ending at ``ctx.target`` and check every piece."""
    t = ctx.target
    start = busy_start(ctx)
    if start == t:
        out.decompositions[t] = []
        return
    try:
        intervals = decompose(ctx, start)
    except IdleWithinWindow as exc:
        out.add(CheckReport("decomposition", False, t, {}, str(exc)))
        return
    out.decompositions[t] = intervals
    out.add(check_decomposition(ctx, intervals, start))
    for iv in intervals:
        if iv.kind is Kind.SUFFIX_CARVING:
            out.add(check_suffix_carving_interval(ctx, iv.t0, iv.t1))
            continue
        try:
            out.add(check_fast_forward_interval(ctx, iv.t0, iv.t1, iv.kind))
        except PreconditionViolated as exc:
            out.add(exc.report)
    prev = None
    for s in ctx.checkpoints().times:
        if s < start:
            continue
        cur = ctx.frozen(ctx.state(s))
        if prev is not None and not prev <= cur:
            out.add(CheckReport("frozen_monotone", False, s, {"lost": prev - cur}, "a frozen job unfroze"))
            break
        prev = cur
    for tf in freeze_events(ctx, start):
        out.add(check_freeze_event(ctx, tf))


def run_battery(instance: Instance, targets="all", *, alg: Trace | None = None, opt: Trace | None = None,
                volume: bool = True, structure: bool = True) -> BatteryResult:
    """Run the checkers on ``instance``.

    ``targets`` is ``"all"`` (every checkpoint), ``"final"`` (the last SLF
    completion) or an explicit list of times.
    """
    base = make_context(instance, None, alg=alg, opt=opt)
    tl = base.timeline
    out = BatteryResult()
    _global_checks(tl, out)
    ts = _targets(tl, targets)
    if volume and ts:
        out.add(volume_sweep(tl, ts))
    if structure:
        for t in ts:
            check_target(make_context(instance, t, timeline=tl), out)
    return out


def report_for_target(instance: Instance, target, alg: Trace | None = None, opt: Trace | None = None) -> BatteryResult:
    """Full per-target report, including the plain volume-bound checker."""
    ctx = make_context(instance, target, alg=alg, opt=opt)
    out = BatteryResult()
    _global_checks(ctx.timeline, out)
    out.add(check_volume_bound(ctx))
    check_target(ctx, out)
    return out
