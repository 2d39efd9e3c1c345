"""Exact time arithmetic, problem instances and piecewise-constant schedules.

Every real-valued quantity (times, sizes, rates, volumes, epsilon) is a
:class:`fractions.Fraction`.  Floats are rejected at the boundary.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

Rat = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class ModelError(ValueError):
    """Base class for invalid instances and traces."""

    field_name: str | None = None

    def __init__(self, message: str, field_name: str | None = None):
        super().__init__(message)
        self.field_name = field_name


class EpsilonOutOfRange(ModelError):
    pass


class DuplicateId(ModelError):
    pass


class NonpositiveSize(ModelError):
    pass


class NegativeRelease(ModelError):
    pass


class UnknownJobId(ModelError, KeyError):
    def __str__(self) -> str:
        return self.args[0]


class IncompleteTrace(ModelError):
    pass


class InvalidTrace(ModelError):
    pass


def rat(value) -> Fraction:
    """Coerce ``value`` to an exact rational.

    Accepts ints, Fractions, strings such as ``"3/2"`` and the JSON form
    ``{"num": 3, "den": 2}``.  Floats and bools are refused.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, Mapping):
        num, den = value["num"], value["den"]
        if not isinstance(num, int) or not isinstance(den, int) or isinstance(num, bool):
            raise TypeError("num and den must be integers")
        if den <= 0:
            raise ValueError("den must be positive")
        return Fraction(num, den)
    raise TypeError(f"cannot build an exact rational from {type(value).__name__}")


def ceil_inv(epsilon: Fraction) -> int:
    """``ceil(1/epsilon)``, the competitive factor."""
    return math.ceil(1 / epsilon)


def rat_to_json(x: Fraction) -> dict:
    return {"num": x.numerator, "den": x.denominator}


def fmt(x: Fraction) -> str:
    return str(x)


@dataclass(frozen=True, order=True)
class Job:
    id: int
    release: Fraction
    size: Fraction


@dataclass(frozen=True)
class Instance:
    epsilon: Fraction
    jobs: tuple[Job, ...]

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {j.id: j for j in self.jobs})

    def job(self, job_id: int) -> Job:
        try:
            return self._by_id[job_id]
        except KeyError:
            raise UnknownJobId(f"unknown job id {job_id}") from None

    @property
    def ids(self) -> list[int]:
        return [j.id for j in self.jobs]

    def __len__(self) -> int:
        return len(self.jobs)

    def with_epsilon(self, epsilon) -> "Instance":
        return make_instance(epsilon, self.jobs)


def make_instance(epsilon, jobs: Iterable) -> Instance:
    """Validate and sort a job list into an :class:`Instance`.

    ``jobs`` may hold :class:`Job` objects or ``(id, release, size)`` triples.
    """
    eps = rat(epsilon)
    if not (ZERO < eps <= ONE):
        raise EpsilonOutOfRange(f"epsilon must lie in (0, 1], got {eps}", "epsilon")
    built = []
    seen = set()
    for item in jobs:
        if isinstance(item, Job):
            job_id, release, size = item.id, item.release, item.size
        else:
            job_id, release, size = item
        if not isinstance(job_id, int) or isinstance(job_id, bool) or job_id < 0:
            raise ModelError(f"job id must be a nonnegative integer, got {job_id!r}", "id")
        release, size = rat(release), rat(size)
        if job_id in seen:
            raise DuplicateId(f"duplicate job id {job_id}", "id")
        if size <= 0:
            raise NonpositiveSize(f"job {job_id}: size must be positive, got {size}", "size")
        if release < 0:
            raise NegativeRelease(f"job {job_id}: release must be >= 0, got {release}", "release")
        seen.add(job_id)
        built.append(Job(job_id, release, size))
    built.sort(key=lambda j: (j.release, j.id))
    return Instance(eps, tuple(built))


@dataclass(frozen=True)
class Segment:
    """Constant processing rates on ``[start, end)``."""

    start: Fraction
    end: Fraction
    rates: Mapping[int, Fraction]

    @property
    def length(self) -> Fraction:
        return self.end - self.start

    def rate(self, job_id: int) -> Fraction:
        return self.rates.get(job_id, ZERO)


@dataclass(frozen=True)
class Trace:
    instance: Instance
    segments: tuple[Segment, ...]
    completions: Mapping[int, Fraction]
    _starts: list = field(init=False, repr=False, compare=False)
    _ends: list = field(init=False, repr=False, compare=False)
    _cum: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        starts, ends, cum = [], [], []
        acc: dict[int, Fraction] = {}
        for seg in self.segments:
            starts.append(seg.start)
            ends.append(seg.end)
            cum.append(dict(acc))
            for j, r in seg.rates.items():
                acc[j] = acc.get(j, ZERO) + r * seg.length
        object.__setattr__(self, "_starts", starts)
        object.__setattr__(self, "_ends", ends)
        object.__setattr__(self, "_cum", cum)

    # -- segment lookup -------------------------------------------------

    def segment_at(self, t: Fraction) -> Segment | None:
        """Segment covering ``[t, t+)``, or ``None`` when idle there."""
        i = bisect.bisect_right(self._starts, t) - 1
        if i >= 0 and t < self._ends[i]:
            return self.segments[i]
        return None

    def segment_before(self, t: Fraction) -> Segment | None:
        """Segment covering ``(t-, t)``, or ``None`` when idle there."""
        i = bisect.bisect_left(self._starts, t) - 1
        if i >= 0 and t <= self._ends[i]:
            return self.segments[i]
        return None

    def rate_at(self, job_id: int, t: Fraction) -> Fraction:
        seg = self.segment_at(t)
        return seg.rate(job_id) if seg else ZERO

    def rate_before(self, job_id: int, t: Fraction) -> Fraction:
        seg = self.segment_before(t)
        return seg.rate(job_id) if seg else ZERO

    # -- derived quantities ----------------------------------------------

    def elapsed(self, job_id: int, t: Fraction) -> Fraction:
        self.instance.job(job_id)
        i = bisect.bisect_right(self._starts, t) - 1
        if i < 0:
            return ZERO
        seg = self.segments[i]
        base = self._cum[i].get(job_id, ZERO)
        return base + seg.rate(job_id) * (min(t, seg.end) - seg.start)

    def remaining(self, job_id: int, t: Fraction) -> Fraction:
        return self.instance.job(job_id).size - self.elapsed(job_id, t)

    def completion(self, job_id: int) -> Fraction | None:
        self.instance.job(job_id)
        return self.completions.get(job_id)

    def is_active(self, job: Job, t: Fraction) -> bool:
        c = self.completions.get(job.id)
        return job.release <= t and (c is None or t < c)

    def is_active_before(self, job: Job, t: Fraction) -> bool:
        """Active at ``t-``: released before ``t`` and not finished before it."""
        c = self.completions.get(job.id)
        return job.release < t and (c is None or t <= c)

    def active_set(self, t: Fraction) -> set[int]:
        return {j.id for j in self.instance.jobs if self.is_active(j, t)}

    def active_before(self, t: Fraction) -> set[int]:
        return {j.id for j in self.instance.jobs if self.is_active_before(j, t)}

    def time_at_elapsed(self, job_id: int, amount: Fraction) -> Fraction | None:
        """Earliest time at which ``job_id`` has received ``amount`` of work."""
        job = self.instance.job(job_id)
        if amount <= 0:
            return job.release
        for i, seg in enumerate(self.segments):
            r = seg.rate(job_id)
            if not r:
                continue
            before = self._cum[i].get(job_id, ZERO)
            after = before + r * seg.length
            if after >= amount:
                return seg.start + (amount - before) / r
        return None

    def boundaries(self) -> list[Fraction]:
        pts = set()
        for seg in self.segments:
            pts.add(seg.start)
            pts.add(seg.end)
        return sorted(pts)

    @property
    def makespan(self) -> Fraction:
        return max(self.completions.values(), default=ZERO)

    def total_flow_time(self) -> Fraction:
        missing = [j.id for j in self.instance.jobs if j.id not in self.completions]
        if missing:
            raise IncompleteTrace(f"jobs without completion: {missing}")
        return sum((self.completions[j.id] - j.release for j in self.instance.jobs), ZERO)

    def busy_time(self, t: Fraction) -> Fraction:
        return sum((max(ZERO, min(t, s.end) - s.start) * sum(s.rates.values(), ZERO)
                    for s in self.segments if s.start < t), ZERO)


# Functional aliases mirroring the operation names.

def elapsed(trace: Trace, job_id: int, t) -> Fraction:
    return trace.elapsed(job_id, rat(t))


def remaining(trace: Trace, job_id: int, t) -> Fraction:
    return trace.remaining(job_id, rat(t))


def active_set(trace: Trace, t) -> set[int]:
    return trace.active_set(rat(t))


def total_flow_time(trace: Trace) -> Fraction:
    return trace.total_flow_time()


def build_trace(instance: Instance, pieces: Iterable[tuple], completions: Mapping) -> Trace:
    """Assemble a trace from ``(start, end, rates)`` pieces, merging neighbours
    that touch and carry identical rates."""
    segs: list[Segment] = []
    for start, end, rates in pieces:
        start, end = rat(start), rat(end)
        rates = {int(k): rat(v) for k, v in rates.items() if rat(v) != 0}
        if end <= start or not rates:
            continue
        if segs and segs[-1].end == start and dict(segs[-1].rates) == rates:
            segs[-1] = Segment(segs[-1].start, end, segs[-1].rates)
        else:
            segs.append(Segment(start, end, rates))
    return Trace(instance, tuple(segs), {int(k): rat(v) for k, v in completions.items()})


def validate_trace(trace: Trace) -> None:
    """Raise :class:`InvalidTrace` unless ``trace`` is a feasible schedule of
    its instance that completes every job exactly."""
    inst = trace.instance
    prev_end = None
    for seg in trace.segments:
        if not seg.start < seg.end:
            raise InvalidTrace(f"segment [{seg.start}, {seg.end}) is empty", "segments")
        if prev_end is not None and seg.start < prev_end:
            raise InvalidTrace(f"segment starting at {seg.start} overlaps its predecessor", "segments")
        prev_end = seg.end
        if sum(seg.rates.values(), ZERO) > 1:
            raise InvalidTrace(f"rates exceed machine capacity at {seg.start}", "rates")
        for j, r in seg.rates.items():
            job = inst.job(j)
            if r <= 0:
                raise InvalidTrace(f"nonpositive rate for job {j} at {seg.start}", "rates")
            if seg.start < job.release:
                raise InvalidTrace(f"job {j} processed before its release", "segments")
            c = trace.completions.get(j)
            if c is not None and seg.end > c:
                raise InvalidTrace(f"job {j} processed after its completion", "segments")
    for job in inst.jobs:
        c = trace.completions.get(job.id)
        if c is None:
            raise IncompleteTrace(f"job {job.id} has no completion time", "completions")
        if trace.elapsed(job.id, c) != job.size:
            raise InvalidTrace(f"job {job.id} receives {trace.elapsed(job.id, c)} units, needs {job.size}",
                               "completions")
        if trace.time_at_elapsed(job.id, job.size) != c:
            raise InvalidTrace(f"job {job.id} finishes before its recorded completion", "completions")
    extra = set(trace.completions) - set(inst.ids)
    if extra:
        raise InvalidTrace(f"completions for unknown jobs {sorted(extra)}", "completions")


# -- JSON ------------------------------------------------------------------

def _field_rat(obj: Mapping, key: str, where: str) -> Fraction:
    if key not in obj:
        raise ModelError(f"missing field '{where}{key}'", where + key)
    try:
        return rat(obj[key])
    except (TypeError, ValueError, KeyError, ZeroDivisionError) as exc:
        raise ModelError(f"field '{where}{key}' is not a num/den rational: {exc}", where + key) from None


def instance_to_dict(instance: Instance) -> dict:
    return {
        "epsilon": rat_to_json(instance.epsilon),
        "jobs": [{"id": j.id, "release": rat_to_json(j.release), "size": rat_to_json(j.size)}
                 for j in instance.jobs],
    }


def instance_from_dict(data: Mapping, epsilon=None) -> Instance:
    if not isinstance(data, Mapping):
        raise ModelError("instance must be a JSON object", "")
    eps = rat(epsilon) if epsilon is not None else _field_rat(data, "epsilon", "")
    raw = data.get("jobs")
    if not isinstance(raw, list):
        raise ModelError("field 'jobs' must be a list", "jobs")
    jobs = []
    for k, item in enumerate(raw):
        where = f"jobs[{k}]."
        if not isinstance(item, Mapping) or "id" not in item:
            raise ModelError(f"missing field '{where}id'", where + "id")
        jobs.append((item["id"], _field_rat(item, "release", where), _field_rat(item, "size", where)))
    return make_instance(eps, jobs)


def trace_to_dict(trace: Trace) -> dict:
    return {
        "segments": [
            {"start": rat_to_json(s.start), "end": rat_to_json(s.end),
             "rates": {str(j): rat_to_json(r) for j, r in sorted(s.rates.items())}}
            for s in trace.segments
        ],
        "completions": {str(j): rat_to_json(c) for j, c in sorted(trace.completions.items())},
    }


def _raw_trace(data: Mapping):
    if not isinstance(data, Mapping):
        raise ModelError("trace must be a JSON object", "")
    raw_segs = data.get("segments")
    if not isinstance(raw_segs, list):
        raise ModelError("field 'segments' must be a list", "segments")
    pieces = []
    for k, s in enumerate(raw_segs):
        where = f"segments[{k}]."
        if not isinstance(s, Mapping):
            raise ModelError(f"'{where[:-1]}' must be an object", where[:-1])
        start, end = _field_rat(s, "start", where), _field_rat(s, "end", where)
        rates = s.get("rates")
        if not isinstance(rates, Mapping):
            raise ModelError(f"field '{where}rates' must be an object", where + "rates")
        try:
            parsed = {int(j): _field_rat(rates, j, where + "rates.") for j in rates}
        except ValueError as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"'{where}rates' keys must be job ids", where + "rates") from None
        pieces.append((start, end, parsed))
    comps = data.get("completions", {})
    if not isinstance(comps, Mapping):
        raise ModelError("field 'completions' must be an object", "completions")
    try:
        completions = {int(j): _field_rat(comps, j, "completions.") for j in comps}
    except ValueError as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError("'completions' keys must be job ids", "completions") from None
    return pieces, completions


def trace_from_dict(data: Mapping, instance: Instance, validate: bool = True) -> Trace:
    pieces, completions = _raw_trace(data)
    segs = tuple(Segment(a, b, r) for a, b, r in pieces)
    trace = Trace(instance, segs, completions)
    if validate:
        validate_trace(trace)
    return trace


def infer_instance(data: Mapping, epsilon=ONE) -> Instance:
    """Reconstruct an instance from a bare trace: each job's release is taken
    as its first processing instant and its size as the total work received."""
    pieces, completions = _raw_trace(data)
    first: dict[int, Fraction] = {}
    work: dict[int, Fraction] = {}
    for start, end, rates in pieces:
        for j, r in rates.items():
            first.setdefault(j, start)
            work[j] = work.get(j, ZERO) + r * (end - start)
    ids = sorted(set(first) | set(completions))
    jobs = [(j, first.get(j, completions.get(j, ZERO)), work.get(j, ONE)) for j in ids]
    return make_instance(epsilon, jobs)


def dumps(obj: dict) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
