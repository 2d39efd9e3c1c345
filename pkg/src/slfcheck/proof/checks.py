"""Checkers for the local-competitiveness argument.

Each checker evaluates one statement of the analysis on concrete traces and
returns a :class:`CheckReport`.  All comparisons are exact; "for all times"
quantifiers are discharged over refined checkpoints, between which every
checked quantity is linear and every set is constant.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from ..core import ZERO, Trace, rat, rat_to_json
from .context import AnalysisContext, Side, State, top_volume


@dataclass
class CheckReport:
    check: str
    passed: bool
    time: Fraction | None = None
    sets: dict = field(default_factory=dict)
    details: str = ""
    data: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "pass": self.passed,
            "witness": {
                "time": rat_to_json(self.time) if self.time is not None else None,
                "sets": [{"name": k, "ids": sorted(v)} for k, v in self.sets.items()],
            },
            "details": self.details,
        }


class PreconditionViolated(Exception):
    """A fast-forward interval does not meet the step's hypotheses."""

    def __init__(self, report: CheckReport):
        super().__init__(report.details)
        self.report = report


class IdleWithinWindow(ValueError):
    pass


class Kind(enum.Enum):
    SUFFIX_CARVING = "SC"
    FAST_FORWARD_2A = "FF-2a"
    FAST_FORWARD_2B = "FF-2b"
    FAST_FORWARD_TAIL = "FF-tail"

    @property
    def is_fast_forward(self) -> bool:
        return self is not Kind.SUFFIX_CARVING


@dataclass(frozen=True)
class IntervalCase:
    t0: Fraction
    t1: Fraction
    kind: Kind
    simultaneous: bool = False  # freeze and all-frozen coincide at t1 (classified 2a)

    def __str__(self) -> str:
        return f"[{self.t0}, {self.t1}] {self.kind.value}"


class _Collector:
    """Accumulates named sub-checks; the first failure becomes the witness."""

    def __init__(self, name: str):
        self.name = name
        self.items: list[tuple[str, bool, str]] = []
        self.time = None
        self.sets: dict = {}
        self.first = None

    def expect(self, label: str, ok: bool, detail: str = "", time=None, sets=None) -> bool:
        self.items.append((label, bool(ok), detail))
        if not ok and self.first is None:
            self.first = f"{label}: {detail}" if detail else label
            self.time = time
            self.sets = {k: set(v) for k, v in (sets or {}).items()}
        return bool(ok)

    def report(self, **data) -> CheckReport:
        ok = all(item[1] for item in self.items)
        if ok:
            details = f"{len(self.items)} conditions hold"
        else:
            bad = sum(1 for item in self.items if not item[1])
            details = f"{bad} of {len(self.items)} conditions fail; first: {self.first}"
        data["conditions"] = self.items
        return CheckReport(self.name, ok, self.time, self.sets, details, data)


def _vol(st: State, ids) -> Fraction:
    return sum((st.r[j] for j in ids), ZERO)


def _vol_star(st: State, ids) -> Fraction:
    return sum((st.rstar[j] for j in ids), ZERO)


def _volume_holds(ctx: AnalysisContext, st: State) -> tuple[bool, str]:
    lhs, rhs = ctx.volume_sides(st)
    return lhs >= rhs, f"vol_B = {lhs}, vol* = {rhs} at {st.label()}"


# -- invariant checks ----------------------------------------------------------

def check_local_competitiveness(ctx: AnalysisContext) -> CheckReport:
    """``|SLF(s)| <= ceil(1/eps) |OPT(s)|`` at every checkpoint ``s <= target``."""
    worst = Fraction(0)
    worst_at = None
    bad = None
    for s in ctx.checkpoints().times:
        st = ctx.state(s)
        a, o = len(st.alg_active), len(st.opt_active)
        if a > ctx.c * o:
            bad = bad or (s, st)
        if o:
            ratio = Fraction(a, o)
            if ratio > worst:
                worst, worst_at = ratio, s
        elif a:
            worst, worst_at = None, s
            break
    if bad is None:
        return CheckReport("local_competitiveness", True, None, {},
                           f"max |SLF|/|OPT| = {worst} <= {ctx.c}", {"max_ratio": worst, "at": worst_at})
    s, st = bad
    return CheckReport("local_competitiveness", False, s,
                       {"SLF": st.alg_active, "OPT": st.opt_active},
                       f"|SLF| = {len(st.alg_active)} > {ctx.c} * |OPT| = {ctx.c * len(st.opt_active)}",
                       {"max_ratio": worst, "at": worst_at})


def check_volume_bound(ctx: AnalysisContext) -> CheckReport:
    """``vol_{B(t')}(t') >= vol*_{OPT(t,t')}(t')`` for every ``t' <= target``.

    Both sides are linear between checkpoints, so the bound is evaluated at
    each checkpoint and at each left limit.
    """
    count = 0
    for s in ctx.checkpoints().times:
        for side in (Side.BEFORE, Side.AT) if s > 0 else (Side.AT,):
            st = ctx.state(s, side)
            lhs, rhs = ctx.volume_sides(st)
            count += 1
            if lhs < rhs:
                return CheckReport("volume_bound", False, s,
                                   {"B": ctx.b_of(st), "OPT(t,t')": ctx.delta_set(st)},
                                   f"vol_B = {lhs} < vol* = {rhs} at {st.label()} (target {ctx.target})")
    return CheckReport("volume_bound", True, None, {}, f"{count} evaluations at target {ctx.target}")


def check_slf_rules(trace: Trace) -> CheckReport:
    """The trace obeys the SLF selection rule on every segment, never idles
    with work present, and no unknown job ever completes."""
    from .context import Timeline  # local: Timeline only needs the trace here

    tl = Timeline(trace, trace)
    eps = tl.epsilon
    q = eps / (1 - eps) if eps < 1 else None
    col = _Collector("slf_rules")
    for seg in trace.segments:
        mid = (seg.start + seg.end) / 2
        st = tl.state(mid)

        def eta(j):
            return st.r[j] if j in st.known else q * st.e[j]

        kmin = min(((st.r[j], j) for j in st.known), default=None)
        umin = min((eta(j) for j in st.unknown), default=None)
        if kmin is not None and (umin is None or kmin[0] <= umin):
            expected = {kmin[1]: Fraction(1)}
        else:
            group = sorted(j for j in st.unknown if eta(j) == umin)
            expected = {j: Fraction(1, len(group)) for j in group}
        got = dict(seg.rates)
        col.expect("selection", got == expected,
                   f"on [{seg.start}, {seg.end}) processed {sorted(got.items())}, SLF picks {sorted(expected.items())}",
                   seg.start, {"processed": got, "expected": expected})
        if len(got) > 1:
            col.expect("equal_pace", len({st.e[j] for j in got}) == 1 and len(set(got.values())) == 1,
                       f"unequal group on [{seg.start}, {seg.end})", seg.start, {"group": got})
        if eps < 1:
            for job in trace.instance.jobs:
                if seg.start < job.release < seg.end:
                    col.expect("arrival_preemption", False,
                               f"segment [{seg.start}, {seg.end}) spans the release of job {job.id}",
                               job.release, {"job": {job.id}})
    idle_pts = [trace.segments[i].end for i in range(len(trace.segments))]
    for p in idle_pts:
        if trace.segment_at(p) is None:
            st = tl.state(p)
            col.expect("non_idling", not st.alg_active, f"idle at {p} with active jobs", p,
                       {"active": st.alg_active})
    for job in trace.instance.jobs:
        k = tl.known_time[job.id]
        c = trace.completions.get(job.id)
        col.expect("known_before_completion", k is not None and c is not None and (k < c or eps == 1),
                   f"job {job.id}: known at {k}, completes at {c}", c, {"job": {job.id}})
    return col.report()


# -- interval decomposition ----------------------------------------------------

def decompose(ctx: AnalysisContext, start=ZERO) -> list[IntervalCase]:
    """Split ``[start, target]`` into suffix-carving and fast-forward steps.

    Case 1 (every unknown job frozen) runs until a non-frozen unknown job
    appears.  Case 2 runs until a job freezes (2a) or every unknown job that
    was present before the instant is frozen (2b); without either event it
    runs to the target (tail).
    """
    start = rat(start)
    t = ctx.target
    cps = [s for s in ctx.checkpoints().times if start <= s <= t]
    for s in cps:
        if s < t and not ctx.state(s).alg_active:
            raise IdleWithinWindow(f"SLF idles at {s} inside [{start}, {t}]")
    out: list[IntervalCase] = []
    t0 = start
    while t0 < t:
        st0 = ctx.state(t0)
        later = [s for s in cps if t0 < s < t]
        if not ctx.nonfrozen_unknown(st0):
            t1 = next((s for s in later if ctx.nonfrozen_unknown(ctx.state(s))), t)
            out.append(IntervalCase(t0, t1, Kind.SUFFIX_CARVING))
        else:
            case = None
            for s in later:
                before, at, pre = ctx.state(s, Side.BEFORE), ctx.state(s), ctx.state(s, Side.START)
                froze = ctx.frozen(before) != ctx.frozen(at)
                settled = pre.unknown == ctx.frozen(pre)
                if froze or settled:
                    kind = Kind.FAST_FORWARD_2A if froze else Kind.FAST_FORWARD_2B
                    case = IntervalCase(t0, s, kind, froze and settled)
                    break
            out.append(case or IntervalCase(t0, t, Kind.FAST_FORWARD_TAIL))
        t0 = out[-1].t1
    return out


def check_decomposition(ctx: AnalysisContext, intervals: list[IntervalCase], start=ZERO) -> CheckReport:
    """Intervals tile ``[start, target]`` and consecutive cases follow the
    driver's transitions."""
    col = _Collector("decomposition")
    start = rat(start)
    if start == ctx.target:
        col.expect("tiling", not intervals, "degenerate window must have no intervals")
        return col.report(intervals=[str(i) for i in intervals])
    col.expect("tiling", bool(intervals) and intervals[0].t0 == start and intervals[-1].t1 == ctx.target,
               f"intervals {[str(i) for i in intervals]} do not cover [{start}, {ctx.target}]")
    for a, b in zip(intervals, intervals[1:]):
        col.expect("tiling", a.t1 == b.t0 and a.t0 < a.t1, f"gap or overlap between {a} and {b}", a.t1)
        case2 = bool(ctx.nonfrozen_unknown(ctx.state(b.t0)))
        if a.kind is Kind.SUFFIX_CARVING:
            col.expect("transition", case2, f"{a} must hand over to case 2", a.t1)
        elif a.kind is Kind.FAST_FORWARD_2A and not a.simultaneous:
            col.expect("transition", case2, f"{a} must hand over to case 2", a.t1)
        elif a.kind is Kind.FAST_FORWARD_2B or a.simultaneous:
            pre = ctx.state(a.t1, Side.START)
            col.expect("transition", pre.unknown == ctx.frozen(pre),
                       f"{a} must leave every earlier unknown job frozen", a.t1)
        col.expect("transition", a.kind is not Kind.FAST_FORWARD_TAIL, f"tail {a} is not last", a.t1)
    return col.report(intervals=[str(i) for i in intervals])


def freeze_events(ctx: AnalysisContext, start=ZERO) -> list[Fraction]:
    """Instants ``s`` in ``(start, target)`` with ``F(s-) != F(s)``."""
    start = rat(start)
    out = []
    for s in ctx.checkpoints().times:
        if start < s < ctx.target and ctx.frozen(ctx.state(s, Side.BEFORE)) != ctx.frozen(ctx.state(s)):
            out.append(s)
    return out


def check_freeze_event(ctx: AnalysisContext, tf) -> CheckReport:
    """Jobs freezing at ``tf`` are all the non-frozen unknown jobs of ``tf-``
    that are still unknown at ``tf``, and the leader is touched at ``tf-``.

    ``data["literal"]`` records whether the stronger identity without the
    "still unknown" restriction also holds; it fails exactly when some
    non-frozen job becomes known at ``tf``.
    """
    tf = rat(tf)
    before, at = ctx.state(tf, Side.BEFORE), ctx.state(tf)
    f_before, f_at = ctx.frozen(before), ctx.frozen(at)
    col = _Collector("freeze_event")
    if f_before == f_at:
        col.expect("event", True)
        return col.report(vacuous=True, literal=True)
    jf = f_at - f_before
    pool = before.unknown - f_before
    expected = pool & at.unknown
    sets = {"J_f": jf, "U\\F at tf-": pool}
    col.expect("monotone", f_before <= f_at, "F(tf-) is not contained in F(tf)", tf, sets)
    col.expect("all_leaders_freeze", jf == expected, f"J_f = {sorted(jf)}, expected {sorted(expected)}", tf, sets)
    lead = ctx.leader_of(before)
    col.expect("leader_touched", lead is not None and lead in before.touched,
               f"leader {lead} at {tf}- is not processed", tf, sets)
    return col.report(literal=jf == pool, became_known=pool - at.unknown)


def check_suffix_carving_interval(ctx: AnalysisContext, t0, t1) -> CheckReport:
    t0, t1 = rat(t0), rat(t1)
    col = _Collector("suffix_carving")
    cps = ctx.checkpoints().between(t0, t1)
    for s in cps:
        st = ctx.state(s)
        col.expect("only_known", st.touched <= st.known,
                   f"unknown jobs {sorted(st.touched - st.known)} processed at {s}", s,
                   {"touched": st.touched, "known": st.known})
    arrivals = [j.id for j in ctx.timeline.jobs
                if t0 < j.release < t1 and not ctx.timeline.is_known(j.id, j.release, Side.AT)]
    col.expect("no_arrivals", not arrivals, f"unknown jobs {arrivals} arrive inside ({t0}, {t1})", t0,
               {"arrivals": arrivals})
    start = ctx.state(t0)
    ok, msg = _volume_holds(ctx, start)
    col.expect("premise", ok, msg, t0)
    for st in (ctx.state(t1, Side.BEFORE), ctx.state(t1)):
        ok, msg = _volume_holds(ctx, st)
        col.expect("conclusion", ok, msg, t1)
    b0 = set(ctx.b_of(start))
    hit = set()
    for s in cps:
        hit |= ctx.state(s).touched & b0
    avoidable = False
    if hit:
        # B is only defined up to ties in volume; if an equally large choice
        # avoids every touched job, the untouched branch applies instead
        touched = set()
        for s in cps:
            touched |= ctx.state(s).touched
        alt = sorted(start.r, key=lambda j: (-start.r[j], j in touched, j))[:len(b0)]
        avoidable = not touched & set(alt)
        end = ctx.state(t1, Side.START)
        bound = ctx.c * len(ctx.delta_set(end))
        col.expect("b_touch_count", avoidable or len(end.alg_active) <= bound,
                   f"|SLF({t1})| = {len(end.alg_active)} > {bound} after touching {sorted(hit)}", t1,
                   {"SLF": end.alg_active, "touched B": hit})
    return col.report(b_touched=bool(hit) and not avoidable, tie_avoided=avoidable)


def check_fast_forward_interval(ctx: AnalysisContext, t0, t1, kind: Kind = Kind.FAST_FORWARD_2B) -> CheckReport:
    """Verify the fast-forward step from ``t0`` to ``t1-``.

    The step starts from the state at ``t0`` without the jobs released at
    ``t0`` and ends at the left limit ``t1-``.  Raises
    :class:`PreconditionViolated` if the hypotheses fail.
    """
    t0, t1 = rat(t0), rat(t1)
    eps = ctx.epsilon
    if eps >= 1:
        raise PreconditionViolated(CheckReport("fast_forward", False, t0, {}, "no unknown jobs when epsilon = 1"))
    q = eps / (1 - eps)
    c = ctx.c
    sig = ctx.state(t0, Side.START)
    end = ctx.state(t1, Side.BEFORE)
    inner = [ctx.state(s) for s in ctx.checkpoints().between(t0, t1)]
    f_sig = ctx.frozen(sig)

    pre = _Collector("fast_forward_preconditions")
    pre.expect("start_all_frozen", sig.unknown == f_sig,
               f"unknown {sorted(sig.unknown)} vs frozen {sorted(f_sig)} at {t0}°", t0,
               {"U": sig.unknown, "F": f_sig})
    for st in inner + [end]:
        pre.expect("frozen_constant", ctx.frozen(st) == f_sig,
                   f"F({st.label()}) = {sorted(ctx.frozen(st))} differs from {sorted(f_sig)}", st.time,
                   {"F": ctx.frozen(st)})
        pre.expect("new_unknown", bool(st.unknown - sig.unknown), f"no new unknown job at {st.label()}",
                   st.time, {"U": st.unknown})
    lead = ctx.leader_of(end)
    pre.expect("leader_touched", lead is not None and lead in end.touched,
               f"leader {lead} not processed at {t1}-", t1, {"touched": end.touched})
    pre_report = pre.report()
    if not pre_report.passed:
        raise PreconditionViolated(pre_report)

    col = _Collector("fast_forward")
    gamma = end.e[lead]
    for st in inner[1:] + [end]:
        col.expect("nonfrozen_exists", bool(ctx.nonfrozen_unknown(st)),
                   f"no unknown non-frozen job at {st.label()}", st.time)
    prev = None
    for st in inner + [end]:
        pool = ctx.nonfrozen_unknown(st)
        if not pool:
            continue
        m = max(st.e[j] for j in pool)
        if prev is not None:
            col.expect("max_elapsed_nondecreasing", m >= prev[0],
                       f"max elapsed drops from {prev[0]} at {prev[1]} to {m} at {st.label()}", st.time,
                       {"U\\F": pool})
        prev = (m, st.label())

    alive = end.alg_active
    # a known job tied with the group at t1 is still alive at t1-: the tie
    # is what ends the step, so survivors only satisfy the weak inequality
    ties = []
    for j in sorted(sig.known):
        survives = j in alive
        ok = sig.r[j] >= q * gamma if survives else sig.r[j] <= q * gamma
        if survives and sig.r[j] == q * gamma:
            ties.append(j)
        col.expect("switching_i", ok,
                   f"job {j}: r(t0) = {sig.r[j]}, threshold {q * gamma}, alive at t1-: {survives}", t1, {"job": {j}})
    for j in sorted(end.known):
        untouched = all(j not in st.touched for st in inner)
        col.expect("switching_ii", j in sig.known and j in sig.r and sig.r[j] == end.r[j] and untouched,
                   f"job {j} is known at {t1}- but was not an untouched known job at {t0}", t1, {"job": {j}})
    for j in sorted(ctx.nonfrozen_unknown(end)):
        col.expect("switching_iii", end.e[j] == gamma, f"job {j}: e = {end.e[j]} != gamma = {gamma}", t1,
                   {"job": {j}})
    new = [job for job in ctx.timeline.jobs if t0 <= job.release < t1]
    for job in new:
        if job.id in alive:
            continue
        done = ctx.alg.elapsed(job.id, t1) == job.size
        col.expect("switching_iv", done and job.size <= gamma / (1 - eps),
                   f"job {job.id}: p = {job.size}, bound {gamma / (1 - eps)}", t1, {"job": {job.id}})

    # set construction for the volume transfer
    o_sig = ctx.delta_set(sig)
    o_end = ctx.delta_set(end)
    b_sig = set(top_volume(sig.r, c * len(o_sig)))
    d = b_sig - alive
    o_plus = o_end - o_sig
    o_in, o_out = o_plus & alive, o_plus - alive
    s1 = (b_sig - d) | o_in
    need = c * len(o_out) + len(d) + (c - 1) * len(o_in)
    pool = sorted(alive - s1)
    few = len(pool) < need
    s2 = set(pool if few else pool[:need])
    s = s1 | s2
    sets = {"D": d, "O+": o_plus, "S1": s1, "S2": s2, "S": s}
    col.expect("opt_nested", o_sig <= o_end, "OPT(t,t0) not inside OPT(t,t1-)", t1, sets)
    col.expect("cardinality", len(s) <= c * len(o_sig) + c * len(o_plus) == c * len(o_end),
               f"|S| = {len(s)}, c*delta0 + c*|O+| = {c * len(o_sig) + c * len(o_plus)}, c*delta1 = {c * len(o_end)}",
               t1, sets)
    target_vol = _vol_star(end, o_end)
    if few:
        col.expect("few_elements", _vol(end, s) >= target_vol,
                   f"vol_S = {_vol(end, s)} < {target_vol}", t1, sets)
    else:
        slack = gamma * len(o_in) + gamma / (1 - eps) * len(o_out) + q * gamma * len(d)
        lb1 = _vol_star(end, o_sig | o_plus) - slack
        col.expect("s1_volume", _vol(end, s1) >= lb1, f"vol_S1 = {_vol(end, s1)} < {lb1}", t1, sets)
        col.expect("s2_volume", _vol(end, s2) >= slack, f"vol_S2 = {_vol(end, s2)} < {slack}", t1, sets)
    for j in sorted(alive):
        col.expect("s2_per_job", end.r[j] >= q * gamma, f"job {j}: r(t1) = {end.r[j]} < {q * gamma}", t1,
                   {"job": {j}})
    col.expect("s_volume", _vol(end, s) >= target_vol, f"vol_S = {_vol(end, s)} < vol* = {target_vol}", t1, sets)
    b_end = ctx.b_of(end)
    col.expect("b_dominates_s", _vol(end, b_end) >= _vol(end, s), "vol_B(t1-) < vol_S", t1, sets)

    ok, msg = _volume_holds(ctx, sig)
    col.expect("premise", ok, msg, t0)
    ok, msg = _volume_holds(ctx, end)
    col.expect("conclusion", ok, msg, t1)
    if kind is Kind.FAST_FORWARD_2B:
        ok, msg = _volume_holds(ctx, ctx.state(t1))
        col.expect("conclusion", ok, msg, t1)
    return col.report(gamma=gamma, leader=lead, few_elements=few, threshold_ties=ties,
                      witness={k: sorted(v) for k, v in sets.items()})
