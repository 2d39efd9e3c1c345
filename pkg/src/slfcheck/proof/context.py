"""Instantaneous views of an (SLF, SRPT) trace pair and the sets the analysis
is phrased in: frozen jobs, the leader, the largest-volume prefix ``B``.

Three views exist for every instant ``s``:

``AT``
    the state after all changes at ``s`` (arrivals, completions, status
    flips); processing is read from ``[s, s+)``.
``BEFORE``
    the left limit ``s-``: jobs released strictly before ``s`` and not
    finished before ``s``, statuses before any flip at ``s``; processing is
    read from ``(s-, s)``.
``START``
    like ``AT`` but without the jobs released exactly at ``s``.  This is the
    state a fast-forward step starts from when new jobs arrive at its left
    endpoint.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from ..core import ZERO, Instance, Trace, ceil_inv, rat
from ..opt import simulate_srpt
from ..slf import simulate_slf


class Side(enum.Enum):
    AT = "at"
    BEFORE = "before"
    START = "start"


@dataclass(frozen=True)
class State:
    time: Fraction
    side: Side
    alg_active: frozenset
    opt_active: frozenset
    known: frozenset
    unknown: frozenset
    touched: frozenset
    r: dict
    e: dict
    rstar: dict

    def label(self) -> str:
        return {Side.AT: str(self.time), Side.BEFORE: f"{self.time}-", Side.START: f"{self.time}°"}[self.side]


@dataclass(frozen=True)
class Checkpoints:
    times: tuple
    events: tuple  # the subset that are not interior representatives

    def upto(self, t: Fraction) -> list:
        return [s for s in self.times if s <= t]

    def between(self, a: Fraction, b: Fraction) -> list:
        """Checkpoints in ``[a, b)``."""
        return [s for s in self.times if a <= s < b]


class Timeline:
    """Target-independent data shared by every analysis of one trace pair."""

    def __init__(self, alg: Trace, opt: Trace, epsilon: Fraction | None = None):
        if alg.instance.jobs != opt.instance.jobs:
            raise ValueError("traces come from different instances")
        self.alg = alg
        self.opt = opt
        self.instance: Instance = alg.instance
        self.epsilon = alg.instance.epsilon if epsilon is None else rat(epsilon)
        self.c = ceil_inv(self.epsilon)
        self.jobs = alg.instance.jobs
        self.known_time: dict[int, Fraction | None] = {
            j.id: alg.time_at_elapsed(j.id, (1 - self.epsilon) * j.size) for j in self.jobs
        }
        self._states: dict = {}
        self._checkpoints: dict = {}

    @property
    def horizon(self) -> Fraction:
        return max(self.alg.makespan, self.opt.makespan)

    def is_known(self, job_id: int, s: Fraction, side: Side) -> bool:
        k = self.known_time[job_id]
        if k is None:
            return False
        return k < s if side is Side.BEFORE else k <= s

    def state(self, s: Fraction, side: Side = Side.AT) -> State:
        key = (s, side)
        st = self._states.get(key)
        if st is not None:
            return st
        alg, opt = self.alg, self.opt
        if side is Side.AT:
            a_act = [j for j in self.jobs if alg.is_active(j, s)]
            o_act = [j for j in self.jobs if opt.is_active(j, s)]
            seg = alg.segment_at(s)
        elif side is Side.BEFORE:
            a_act = [j for j in self.jobs if alg.is_active_before(j, s)]
            o_act = [j for j in self.jobs if opt.is_active_before(j, s)]
            seg = alg.segment_before(s)
        else:
            a_act = [j for j in self.jobs if alg.is_active(j, s) and j.release < s]
            o_act = [j for j in self.jobs if opt.is_active(j, s) and j.release < s]
            seg = alg.segment_at(s)
        e = {j.id: alg.elapsed(j.id, s) for j in a_act}
        r = {j.id: j.size - e[j.id] for j in a_act}
        rstar = {j.id: opt.remaining(j.id, s) for j in o_act}
        known = frozenset(j.id for j in a_act if self.is_known(j.id, s, side))
        ids = frozenset(e)
        touched = frozenset(j for j in (seg.rates if seg else ()) if j in ids)
        st = State(s, side, ids, frozenset(rstar), known, ids - known, touched, r, e, rstar)
        self._states[key] = st
        return st

    def checkpoints(self, target: Fraction) -> Checkpoints:
        """Refined checkpoints on ``[0, target]``.

        Refinement runs once over the whole horizon; smaller targets take the
        prefix and, if needed, insert themselves plus one interior point.
        """
        cp = self._checkpoints.get(target)
        if cp is not None:
            return cp
        full = self._checkpoints.get(None)
        if full is None:
            full = _refine(self, self.horizon)
            self._checkpoints[None] = full
        times = [x for x in full.times if x <= target]
        events = [x for x in full.events if x <= target]
        if not events or events[-1] != target:
            prev = events[-1] if events else None
            events.append(target)
            times = [x for x in times if prev is None or x <= prev]
            if prev is not None:
                times.append((prev + target) / 2)
            times.append(target)
        cp = Checkpoints(tuple(times), tuple(events))
        self._checkpoints[target] = cp
        return cp


def _crossings(trace: Trace, st: State, a: Fraction, b: Fraction, remaining: dict) -> set:
    seg = trace.segment_at(a)
    out = set()
    ids = sorted(remaining)
    for x in range(len(ids)):
        i = ids[x]
        ri = seg.rate(i) if seg else ZERO
        for y in range(x + 1, len(ids)):
            k = ids[y]
            rk = seg.rate(k) if seg else ZERO
            if ri == rk:
                continue
            when = a + (remaining[i] - remaining[k]) / (ri - rk)
            if a < when < b:
                out.add(when)
    return out


def _refine(tl: Timeline, target: Fraction) -> Checkpoints:
    base = {ZERO, target}
    for tr in (tl.alg, tl.opt):
        base.update(tr.boundaries())
        base.update(tr.completions.values())
    base.update(j.release for j in tl.jobs)
    base.update(k for k in tl.known_time.values() if k is not None)
    base = sorted(x for x in base if x <= target)
    events = set(base)
    for a, b in zip(base, base[1:]):
        st = tl.state(a, Side.AT)
        events |= _crossings(tl.alg, st, a, b, st.r)
        events |= _crossings(tl.opt, st, a, b, st.rstar)
    events = sorted(events)
    mids = [(a + b) / 2 for a, b in zip(events, events[1:])]
    return Checkpoints(tuple(sorted(events + mids)), tuple(events))


@dataclass
class AnalysisContext:
    """An SLF trace, an SRPT trace and the fixed target time of the analysis."""

    alg: Trace
    opt: Trace
    epsilon: Fraction
    target: Fraction
    timeline: Timeline = field(default=None, repr=False)

    def __post_init__(self):
        self.target = rat(self.target)
        if self.timeline is None:
            self.timeline = Timeline(self.alg, self.opt, self.epsilon)
        if self.target < 0:
            raise ValueError("target must be nonnegative")
        if self.alg.completions and self.target > self.alg.makespan:
            raise ValueError(f"target {self.target} lies after the last completion {self.alg.makespan}")
        self.c = self.timeline.c
        t = self.target
        last: dict[int, Fraction] = {}
        for seg in self.alg.segments:
            if seg.start >= t:
                break
            for j in seg.rates:
                last[j] = min(seg.end, t)
        self.last_touch = last
        self._frozen: dict = {}
        self.opt_target = self.timeline.state(t, Side.AT).opt_active

    def state(self, s, side: Side = Side.AT) -> State:
        return self.timeline.state(rat(s), side)

    def checkpoints(self) -> Checkpoints:
        return self.timeline.checkpoints(self.target)

    def frozen(self, st: State) -> frozenset:
        """Unknown jobs with zero rate on ``[s, target)`` (for ``BEFORE``
        views, additionally untouched at ``s-``)."""
        key = (st.time, st.side)
        out = self._frozen.get(key)
        if out is None:
            s = st.time
            strict = st.side is Side.BEFORE
            out = frozenset(
                j for j in st.unknown
                if j not in self.last_touch
                or (self.last_touch[j] < s if strict else self.last_touch[j] <= s)
            )
            self._frozen[key] = out
        return out

    def nonfrozen_unknown(self, st: State) -> frozenset:
        return st.unknown - self.frozen(st)

    def leader_of(self, st: State) -> int | None:
        pool = self.nonfrozen_unknown(st)
        if not pool:
            return None
        return min(pool, key=lambda j: (-st.e[j], j))

    def delta_set(self, st: State) -> frozenset:
        """Jobs alive in OPT both in this view and at the target."""
        return self.opt_target & st.opt_active

    def b_of(self, st: State) -> list[int]:
        return top_volume(st.r, self.c * len(self.delta_set(st)))

    def volume_sides(self, st: State) -> tuple[Fraction, Fraction]:
        """``(vol over B, vol* over OPT(target, s))`` in this view."""
        both = self.delta_set(st)
        lhs = sum((st.r[j] for j in self.b_of(st)), ZERO)
        rhs = sum((st.rstar[j] for j in both), ZERO)
        return lhs, rhs


def top_volume(remaining: dict, x: int) -> list[int]:
    """The ``x`` ids of largest remaining volume, lowest id first on ties."""
    if x <= 0:
        return []
    order = sorted(remaining, key=lambda j: (-remaining[j], j))
    return order[:x]


def make_context(instance: Instance, target=None, alg: Trace | None = None, opt: Trace | None = None,
                 timeline: Timeline | None = None) -> AnalysisContext:
    if timeline is None:
        alg = alg if alg is not None else simulate_slf(instance)
        opt = opt if opt is not None else simulate_srpt(instance)
        timeline = Timeline(alg, opt, instance.epsilon)
    t = timeline.alg.makespan if target is None else rat(target)
    return AnalysisContext(timeline.alg, timeline.opt, timeline.epsilon, t, timeline)


# -- public set queries ------------------------------------------------------

def refine_checkpoints(ctx: AnalysisContext) -> Checkpoints:
    return ctx.checkpoints()


def frozen_set(ctx: AnalysisContext, tprime, side: Side = Side.AT) -> set[int]:
    tprime = rat(tprime)
    if tprime > ctx.target:
        raise ValueError("tprime must not exceed the target")
    return set(ctx.frozen(ctx.state(tprime, side)))


def leader(ctx: AnalysisContext, s, side: Side = Side.AT) -> int | None:
    s = rat(s)
    if s > ctx.target:
        raise ValueError("s must not exceed the target")
    return ctx.leader_of(ctx.state(s, side))


def b_set(trace: Trace, tprime, x: int) -> set[int]:
    tprime = rat(tprime)
    rem = {j: trace.remaining(j, tprime) for j in trace.active_set(tprime)}
    return set(top_volume(rem, x))


def busy_start(ctx: AnalysisContext) -> Fraction:
    """Left end of the maximal busy interval of SLF that ends at the target.

    Returns the target itself when SLF idles just before it.
    """
    t = ctx.target
    alg = ctx.alg
    cands = [ZERO] + [j.release for j in ctx.timeline.jobs if j.release <= t]
    s = max(r for r in cands if not alg.active_before(r))
    for c in ctx.checkpoints().between(s, t):
        if not ctx.state(c).alg_active:
            return t
    return s
