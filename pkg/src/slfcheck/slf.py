"""Event-driven fluid simulation of Shortest Lower-Bound First.

The Round-Robin tie group is simulated in its fluid limit: the ``k`` unknown
jobs of minimum estimate share the machine at rate ``1/k`` each.  Between
events every rate is constant, so all state advances linearly and every event
time is the exact root of a linear equation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from .core import ONE, ZERO, Instance, Job, Trace, build_trace


@dataclass(frozen=True)
class Unknown:
    elapsed: Fraction


@dataclass(frozen=True)
class Known:
    remaining: Fraction


class EventKind(enum.Enum):
    ARRIVAL = "arrival"
    COMPLETION = "completion"
    BECOMES_KNOWN = "becomes_known"
    REACHES_KNOWN = "reaches_known"  # group estimate climbs to the smallest known remaining
    MERGE = "merge"  # group estimate climbs to another unknown job's estimate


@dataclass
class SlfConfig:
    """Mutable simulation state at time ``now``.

    ``statuses`` holds only released, unfinished jobs; ``pending`` holds jobs
    not yet released, sorted by ``(release, id)``.
    """

    epsilon: Fraction
    now: Fraction
    jobs: dict[int, Job]
    statuses: dict[int, Unknown | Known] = field(default_factory=dict)
    pending: list[Job] = field(default_factory=list)

    def status_for(self, job: Job, elapsed: Fraction) -> Unknown | Known:
        remaining = job.size - elapsed
        if remaining <= self.epsilon * job.size:
            return Known(remaining)
        return Unknown(elapsed)

    def elapsed(self, job_id: int) -> Fraction:
        st = self.statuses[job_id]
        if isinstance(st, Unknown):
            return st.elapsed
        return self.jobs[job_id].size - st.remaining


def estimate(status: Unknown | Known, epsilon: Fraction) -> Fraction:
    """Priority value of an active job: remaining time once known, otherwise
    ``epsilon/(1-epsilon)`` times the elapsed time."""
    if isinstance(status, Known):
        return status.remaining
    if epsilon >= 1:
        raise ValueError("no unknown jobs exist when epsilon = 1")
    return epsilon / (1 - epsilon) * status.elapsed


def select_processing(config: SlfConfig, epsilon: Fraction | None = None, *,
                      known_wins_ties: bool = True, share_group: bool = True) -> dict[int, Fraction]:
    """Return the processing rates chosen by SLF in ``config``.

    The two keyword flags exist only to build deliberately broken engines for
    negative controls; the defaults implement the algorithm.
    """
    eps = config.epsilon if epsilon is None else epsilon
    best_known: tuple[Fraction, int] | None = None
    best_unknown: Fraction | None = None
    for j, st in config.statuses.items():
        eta = estimate(st, eps)
        if isinstance(st, Known):
            if best_known is None or (eta, j) < best_known:
                best_known = (eta, j)
        elif best_unknown is None or eta < best_unknown:
            best_unknown = eta
    if best_known is None and best_unknown is None:
        return {}
    if best_unknown is None or (
        best_known is not None
        and (best_known[0] <= best_unknown if known_wins_ties else best_known[0] < best_unknown)
    ):
        return {best_known[1]: ONE}
    group = sorted(j for j, st in config.statuses.items()
                   if isinstance(st, Unknown) and estimate(st, eps) == best_unknown)
    if not share_group:
        return {group[0]: ONE}
    share = Fraction(1, len(group))
    return {j: share for j in group}


def next_event(config: SlfConfig, rates: dict[int, Fraction], *,
               strict_catch_up: bool = False) -> tuple[Fraction | None, list[EventKind]]:
    """Earliest time after ``config.now`` at which the selection may change.

    Returns ``(None, [])`` when nothing is processed and nothing is pending.
    """
    eps = config.epsilon
    now = config.now
    cands: list[tuple[Fraction, EventKind]] = []
    if config.pending:
        cands.append((config.pending[0].release, EventKind.ARRIVAL))
    if rates:
        some = next(iter(rates))
        st = config.statuses[some]
        if isinstance(st, Known):
            cands.append((now + st.remaining / rates[some], EventKind.COMPLETION))
        else:
            rate = rates[some]
            e = st.elapsed
            for j in rates:
                thr = (1 - eps) * config.jobs[j].size
                cands.append((now + (thr - e) / rate, EventKind.BECOMES_KNOWN))
            known = [s.remaining for s in config.statuses.values() if isinstance(s, Known)]
            if known:
                # eps/(1-eps) * (e + rate*dt) = min known remaining
                dt = ((1 - eps) / eps * min(known) - e) / rate
                if dt > 0 or not strict_catch_up:
                    cands.append((now + dt, EventKind.REACHES_KNOWN))
            # with a shared group every outside unknown job is strictly ahead;
            # the single-member mutant must skip peers it is tied with
            outside = [s.elapsed for j, s in config.statuses.items()
                       if isinstance(s, Unknown) and j not in rates and s.elapsed > e]
            if outside:
                cands.append((now + (min(outside) - e) / rate, EventKind.MERGE))
    if not cands:
        return None, []
    when = min(t for t, _ in cands)
    kinds = sorted({k for t, k in cands if t == when}, key=lambda k: k.value)
    return when, kinds


def _advance(config: SlfConfig, rates: dict[int, Fraction], until: Fraction,
             completions: dict[int, Fraction]) -> None:
    dt = until - config.now
    for j, r in rates.items():
        job = config.jobs[j]
        e = config.elapsed(j) + r * dt
        if e >= job.size:
            del config.statuses[j]
            completions[j] = until
        else:
            config.statuses[j] = config.status_for(job, e)
    config.now = until
    while config.pending and config.pending[0].release <= until:
        job = config.pending.pop(0)
        config.statuses[job.id] = config.status_for(job, ZERO)


def simulate_slf(instance: Instance, *, known_wins_ties: bool = True, share_group: bool = True) -> Trace:
    """Simulate SLF on ``instance`` and return its trace.

    Ties among known jobs go to the lowest id.  With ``epsilon = 1`` every job
    is known at release and the run coincides with SRPT.
    """
    eps = instance.epsilon
    config = SlfConfig(eps, ZERO, {j.id: j for j in instance.jobs}, pending=list(instance.jobs))
    mutated = not (known_wins_ties and share_group)
    completions: dict[int, Fraction] = {}
    pieces = []
    if config.pending:
        config.now = config.pending[0].release
        _advance(config, {}, config.now, completions)
    while config.statuses or config.pending:
        if not config.statuses:
            _advance(config, {}, config.pending[0].release, completions)
            continue
        rates = select_processing(config, known_wins_ties=known_wins_ties, share_group=share_group)
        when, _ = next_event(config, rates, strict_catch_up=not known_wins_ties)
        if when <= config.now:
            if mutated:
                raise RuntimeError(f"mutated engine stalled at {config.now}")
            raise AssertionError(f"non-advancing event at {config.now}")
        pieces.append((config.now, when, rates))
        _advance(config, rates, when, completions)
    return build_trace(instance, pieces, completions)
