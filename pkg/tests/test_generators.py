from fractions import Fraction as F

import pytest

from slfcheck.core import dumps, instance_to_dict
from slfcheck.generators import CSV_COLUMNS, Family, GenSpec, InvalidSpec, generate, sweep

from .conftest import inst


def test_uniform_single_job():
    i = generate(GenSpec(Family.UNIFORM, 1, 5, 5, 123), F(1, 2))
    assert len(i) == 1


def test_staircase_two_jobs():
    i = generate(GenSpec(Family.STAIRCASE, 2, 4, 50, 0), F(1, 2))
    assert [(j.release, j.size) for j in i.jobs] == [(0, 4), (2, 2)]


def test_staircase_keeps_denominators_small():
    i = generate(GenSpec(Family.STAIRCASE, 12, 50, 50, 0), F(1, 3))
    assert all(j.size.denominator <= 16 for j in i.jobs)
    assert all(j.release <= 50 for j in i.jobs)


@pytest.mark.parametrize("family", list(Family))
def test_deterministic(family):
    spec = GenSpec(family, 9, 20, 20, 2**63 + 5)
    a = dumps(instance_to_dict(generate(spec, F(2, 3))))
    b = dumps(instance_to_dict(generate(spec, F(2, 3))))
    assert a == b


@pytest.mark.parametrize("family", list(Family))
def test_bounds(family):
    for seed in range(20):
        i = generate(GenSpec(family, 20, 50, 50, seed), F(1, 4))
        assert len(i) == 20
        assert all(0 < j.size <= 50 and 0 <= j.release <= 50 for j in i.jobs)
        assert all(j.size.denominator <= 16 and j.release.denominator <= 16 for j in i.jobs)


def test_seeds_differ():
    a = generate(GenSpec(Family.UNIFORM, 5, 10, 10, 1), F(1, 2))
    b = generate(GenSpec(Family.UNIFORM, 5, 10, 10, 2), F(1, 2))
    assert a != b


def test_bursty_clusters_releases():
    i = generate(GenSpec(Family.BURSTY, 16, 10, 40, 3), F(1, 2))
    assert len({j.release.__floor__() for j in i.jobs}) <= 8


@pytest.mark.parametrize("kwargs, field", [
    ({"n": 0}, "n"),
    ({"max_size": 0}, "max_size"),
    ({"seed": -1}, "seed"),
    ({"family": "Nope"}, "family"),
])
def test_invalid_spec(kwargs, field):
    args = {"family": Family.UNIFORM, "n": 3, "max_size": 5, "max_release": 5, "seed": 0} | kwargs
    with pytest.raises(InvalidSpec) as info:
        GenSpec(**args)
    assert info.value.field_name == field


def test_sweep_rows():
    rows = sweep([GenSpec(Family.UNIFORM, 4, 5, 5, 0), GenSpec("DescendingStaircase", 3, 4, 20, 0)],
                 [F(1, 2), F(1)])
    assert len(rows) == 4
    for row in rows:
        assert set(row) == set(CSV_COLUMNS)
        assert row["checks_passed"]
    assert [r["ratio"] for r in rows if r["epsilon"] == 1] == [1, 1]


def test_sweep_parallel_matches_serial():
    specs = [GenSpec(Family.BURSTY, 5, 6, 6, s) for s in range(3)]
    assert sweep(specs, [F(1, 3)], workers=2) == sweep(specs, [F(1, 3)])


def test_sweep_needs_input():
    with pytest.raises(InvalidSpec):
        sweep([], [F(1, 2)])


def test_e1_ratio(e1):
    from slfcheck.opt import simulate_srpt
    from slfcheck.slf import simulate_slf

    assert simulate_slf(e1).total_flow_time() / simulate_srpt(e1).total_flow_time() == F(7, 6)
    i = inst(F(1, 2), (0, 4))
    assert simulate_slf(i).total_flow_time() == simulate_srpt(i).total_flow_time()
