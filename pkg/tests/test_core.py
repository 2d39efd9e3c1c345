import json
from fractions import Fraction as F

import pytest

from slfcheck.core import (
    DuplicateId,
    EpsilonOutOfRange,
    IncompleteTrace,
    InvalidTrace,
    ModelError,
    NegativeRelease,
    NonpositiveSize,
    Segment,
    Trace,
    UnknownJobId,
    active_set,
    build_trace,
    dumps,
    elapsed,
    infer_instance,
    instance_from_dict,
    instance_to_dict,
    make_instance,
    rat,
    remaining,
    total_flow_time,
    trace_from_dict,
    trace_to_dict,
    validate_trace,
)
from slfcheck.opt import simulate_srpt
from slfcheck.slf import simulate_slf

from .conftest import A, B, inst


def test_rat_accepts_exact_forms():
    assert rat(3) == 3
    assert rat("3/2") == F(3, 2)
    assert rat({"num": 6, "den": 4}) == F(3, 2)


@pytest.mark.parametrize("bad", [0.5, True, {"num": 1.0, "den": 2}, {"num": 1, "den": 0}])
def test_rat_rejects_inexact(bad):
    with pytest.raises((TypeError, ValueError)):
        rat(bad)


def test_make_instance_sorts_by_release_then_id():
    i = make_instance(F(1, 2), [(2, 1, 1), (1, 0, 3), (0, 1, 2)])
    assert [j.id for j in i.jobs] == [1, 0, 2]


@pytest.mark.parametrize("eps, jobs, err, field", [
    (0, [(0, 0, 1)], EpsilonOutOfRange, "epsilon"),
    (F(3, 2), [(0, 0, 1)], EpsilonOutOfRange, "epsilon"),
    (F(1, 2), [(0, 0, 1), (0, 0, 2)], DuplicateId, "id"),
    (F(1, 2), [(0, 0, 0)], NonpositiveSize, "size"),
    (F(1, 2), [(0, -1, 1)], NegativeRelease, "release"),
])
def test_make_instance_errors(eps, jobs, err, field):
    with pytest.raises(err) as info:
        make_instance(eps, jobs)
    assert info.value.field_name == field


def test_e1_queries(e1):
    slf, srpt = simulate_slf(e1), simulate_srpt(e1)
    assert elapsed(slf, A, 2) == 1
    assert elapsed(slf, A, 3) == 2
    assert elapsed(slf, A, 0) == 0
    assert remaining(slf, B, 2) == 1
    assert remaining(slf, B, 0) == 2
    assert remaining(srpt, A, 2) == 0
    assert active_set(slf, F(5, 2)) == {A, B}
    assert active_set(slf, 4) == set()
    assert total_flow_time(slf) == 7
    assert total_flow_time(srpt) == 6


def test_active_set_before_first_release():
    t = simulate_slf(inst(F(1, 2), (3, 1)))
    assert active_set(t, 1) == set()
    assert total_flow_time(t) == 1


def test_unknown_job_id(e1):
    with pytest.raises(UnknownJobId):
        elapsed(simulate_slf(e1), 9, 1)


def test_incomplete_trace_has_no_flow(e1):
    t = Trace(e1, (Segment(F(0), F(2), {A: F(1)}),), {A: F(2)})
    with pytest.raises(IncompleteTrace):
        t.total_flow_time()


def test_flow_equals_integral_of_active_count(e4):
    t = simulate_slf(e4)
    pts = sorted(set(t.boundaries()) | {j.release for j in e4.jobs})
    area = sum((b - a) * len(t.active_set(a)) for a, b in zip(pts, pts[1:]))
    assert area == t.total_flow_time() == 13


def test_build_trace_merges_equal_neighbours(e2):
    t = build_trace(e2, [(0, 2, {0: 1}), (2, 4, {0: 1})], {0: 4})
    assert len(t.segments) == 1


@pytest.mark.parametrize("segs, comps", [
    ([(0, 1, {A: 2})], {A: F(1, 2)}),                       # over capacity
    ([(0, 2, {A: 1}), (1, 3, {B: 1})], {A: 2, B: 3}),       # overlap
    ([(0, 2, {A: 1})], {A: 2}),                             # B missing
    ([(0, 2, {A: 1}), (2, 3, {B: 1})], {A: 2, B: 3}),       # B short by one unit
])
def test_validate_trace_rejects(e1, segs, comps):
    t = Trace(e1, tuple(Segment(F(a), F(b), {j: F(r) for j, r in rs.items()}) for a, b, rs in segs),
              {j: F(c) for j, c in comps.items()})
    with pytest.raises((InvalidTrace, IncompleteTrace)):
        validate_trace(t)


def test_json_round_trip_is_byte_identical(e4):
    text = dumps(instance_to_dict(e4))
    assert dumps(instance_to_dict(instance_from_dict(json.loads(text)))) == text
    trace = simulate_slf(e4)
    ttext = dumps(trace_to_dict(trace))
    back = trace_from_dict(json.loads(ttext), e4)
    assert dumps(trace_to_dict(back)) == ttext
    assert back.completions == trace.completions


def test_json_errors_name_the_field():
    with pytest.raises(ModelError) as info:
        instance_from_dict({"epsilon": {"num": 1, "den": 2}, "jobs": [{"id": 0, "release": {"num": 0, "den": 1}}]})
    assert info.value.field_name == "jobs[0].size"
    with pytest.raises(ModelError) as info:
        instance_from_dict({"jobs": []})
    assert info.value.field_name == "epsilon"


def test_infer_instance_from_trace(e1):
    data = trace_to_dict(simulate_srpt(e1))
    got = infer_instance(data, F(1, 2))
    assert [(j.id, j.release, j.size) for j in got.jobs] == [(A, 0, 2), (B, 2, 2)]
