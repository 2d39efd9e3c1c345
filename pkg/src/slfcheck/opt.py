"""Optimal clairvoyant baseline.

:func:`simulate_srpt` produces the SRPT schedule, which is optimal for total
flow time on one machine.  :func:`brute_force_opt_flow` is an independent
exhaustive search over unit-slot schedules, used only as an oracle on tiny
integer instances.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .core import ONE, ZERO, Instance, ModelError, Trace, build_trace


class TooLarge(ModelError):
    pass


class NonIntegerData(ModelError):
    pass


MAX_DP_JOBS = 6
MAX_DP_HORIZON = 64


def simulate_srpt(instance: Instance) -> Trace:
    """Shortest Remaining Processing Time; ties go to the lowest id."""
    pending = list(instance.jobs)
    remaining: dict[int, Fraction] = {}
    completions: dict[int, Fraction] = {}
    pieces = []
    now = pending[0].release if pending else ZERO
    while pending or remaining:
        while pending and pending[0].release <= now:
            job = pending.pop(0)
            remaining[job.id] = job.size
        if not remaining:
            now = pending[0].release
            continue
        j = min(remaining, key=lambda k: (remaining[k], k))
        until = now + remaining[j]
        if pending and pending[0].release < until:
            until = pending[0].release
        pieces.append((now, until, {j: ONE}))
        remaining[j] -= until - now
        if remaining[j] == 0:
            del remaining[j]
            completions[j] = until
        now = until
    return build_trace(instance, pieces, completions)


def brute_force_opt_flow(instance: Instance, horizon: int | None = None) -> Fraction:
    """Minimum total flow time over preemptive schedules switching only at
    integer times, by memoised search over ``(slot, remaining work)`` states.

    Requires integer releases and sizes, at most six jobs and a horizon of at
    most 64 slots.  The machine idles only when no job is available.
    """
    jobs = instance.jobs
    if any(j.release.denominator != 1 or j.size.denominator != 1 for j in jobs):
        raise NonIntegerData("brute force requires integer releases and sizes")
    if len(jobs) > MAX_DP_JOBS:
        raise TooLarge(f"at most {MAX_DP_JOBS} jobs, got {len(jobs)}")
    releases = tuple(int(j.release) for j in jobs)
    sizes = tuple(int(j.size) for j in jobs)
    need = sum(sizes) + max(releases, default=0)
    if horizon is None:
        horizon = need
    if not need <= horizon <= MAX_DP_HORIZON:
        raise TooLarge(f"horizon must satisfy {need} <= horizon <= {MAX_DP_HORIZON}, got {horizon}")
    n = len(jobs)

    @lru_cache(maxsize=None)
    def best(slot: int, rem: tuple[int, ...]) -> float:
        if not any(rem):
            return 0
        if slot >= horizon:
            return float("inf")
        alive = [i for i in range(n) if rem[i] and releases[i] <= slot]
        if not alive:
            return best(slot + 1, rem)
        cost = len(alive)
        out = float("inf")
        for i in alive:
            nxt = rem[:i] + (rem[i] - 1,) + rem[i + 1:]
            out = min(out, cost + best(slot + 1, nxt))
        return out

    value = best(0, sizes)
    return Fraction(int(value))
