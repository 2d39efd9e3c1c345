from fractions import Fraction as F

import pytest

from slfcheck.core import make_instance

A, B, C = 0, 1, 2


def inst(eps, *jobs):
    return make_instance(F(eps), [(i, F(r), F(p)) for i, (r, p) in enumerate(jobs)])


@pytest.fixture
def e1():
    return inst(F(1, 2), (0, 2), (0, 2))


@pytest.fixture
def e2():
    return inst(F(1, 2), (0, 4))


@pytest.fixture
def e4():
    return inst(F(1, 2), (0, 10), (1, 1), (2, F(1, 2)))
