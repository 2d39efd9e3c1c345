"""Seeded instance families and the ratio sweep built on them."""

from __future__ import annotations

import enum
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .core import ModelError, Instance, ceil_inv, make_instance, rat
from .opt import simulate_srpt
from .slf import simulate_slf

DENOMINATORS = (1, 2, 4, 8, 16)
CSV_COLUMNS = ("family", "seed", "n", "epsilon", "flow_slf", "flow_opt", "ratio", "max_local_ratio", "checks_passed")


class InvalidSpec(ModelError):
    pass


class Family(enum.Enum):
    UNIFORM = "UniformRandom"
    BURSTY = "BurstyArrivals"
    STAIRCASE = "DescendingStaircase"


@dataclass(frozen=True)
class GenSpec:
    family: Family
    n: int
    max_size: int = 10
    max_release: int = 10
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.family, Family):
            try:
                object.__setattr__(self, "family", Family(self.family))
            except ValueError:
                raise InvalidSpec(f"unknown family {self.family!r}", "family") from None
        if self.n < 1:
            raise InvalidSpec("n must be at least 1", "n")
        if self.max_size < 1:
            raise InvalidSpec("max_size must be at least 1", "max_size")
        if self.max_release < 0:
            raise InvalidSpec("max_release must be nonnegative", "max_release")
        if not 0 <= self.seed < 2**64:
            raise InvalidSpec("seed must fit in 64 bits", "seed")


def _draw(rng: random.Random, low: int, high: int) -> Fraction:
    """A rational in ``[low, high]`` with a denominator from DENOMINATORS."""
    den = rng.choice(DENOMINATORS)
    return Fraction(rng.randint(low * den, high * den), den)


def _size(rng: random.Random, max_size: int) -> Fraction:
    den = rng.choice(DENOMINATORS)
    return Fraction(rng.randint(1, max_size * den), den)


def _uniform(spec: GenSpec, rng: random.Random, eps: Fraction) -> list:
    return [(i, _draw(rng, 0, spec.max_release), _size(rng, spec.max_size)) for i in range(spec.n)]


def _bursty(spec: GenSpec, rng: random.Random, eps: Fraction) -> list:
    bursts = sorted(_draw(rng, 0, spec.max_release) for _ in range(max(1, spec.n // 4)))
    jobs = []
    for i in range(spec.n):
        center = rng.choice(bursts)
        jitter = Fraction(rng.randint(0, 4), 16)
        release = min(center + jitter, Fraction(spec.max_release))
        # a few long jobs among many short ones
        cap = spec.max_size if rng.random() < 0.25 else max(1, spec.max_size // 8)
        jobs.append((i, release, _size(rng, cap)))
    return jobs


def _staircase(spec: GenSpec, rng: random.Random, eps: Fraction) -> list:
    # sizes cycle p, p/2, ..., p/16 so denominators stay bounded; each job is
    # released when its predecessor reaches the known threshold in isolation
    base = Fraction(spec.max_size)
    jobs = []
    release = Fraction(0)
    for i in range(spec.n):
        size = base / 2 ** (i % 5)
        jobs.append((i, release, size))
        release = min(release + (1 - eps) * size, Fraction(spec.max_release))
    return jobs


_BUILDERS = {Family.UNIFORM: _uniform, Family.BURSTY: _bursty, Family.STAIRCASE: _staircase}


def generate(spec: GenSpec, epsilon) -> Instance:
    """Deterministic instance for ``(spec, epsilon)``.

    The staircase family ignores the seed and clamps releases at
    ``max_release``.
    """
    eps = rat(epsilon)
    rng = random.Random(f"{spec.family.value}:{spec.n}:{spec.max_size}:{spec.max_release}:{spec.seed}")
    return make_instance(eps, _BUILDERS[spec.family](spec, rng, eps))


def _row(args) -> dict:
    spec, eps, targets = args
    from .proof.battery import run_battery

    inst = generate(spec, eps)
    alg, opt = simulate_slf(inst), simulate_srpt(inst)
    f_alg, f_opt = alg.total_flow_time(), opt.total_flow_time()
    res = run_battery(inst, targets if len(inst) <= 20 else "final", alg=alg, opt=opt)
    return {
        "family": spec.family.value,
        "seed": spec.seed,
        "n": spec.n,
        "epsilon": eps,
        "flow_slf": f_alg,
        "flow_opt": f_opt,
        "ratio": f_alg / f_opt if f_opt else Fraction(1),
        "max_local_ratio": res.max_local_ratio,
        "checks_passed": res.passed and f_alg <= ceil_inv(eps) * f_opt,
    }


def sweep(specs: list[GenSpec], epsilons: list, *, targets="all", workers: int = 1) -> list[dict]:
    """One row per ``(spec, epsilon)`` in input order."""
    if not specs or not epsilons:
        raise InvalidSpec("sweep needs at least one spec and one epsilon", "specs")
    jobs = [(s, rat(e), targets) for s in specs for e in epsilons]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_row, jobs, chunksize=4))
    return [_row(j) for j in jobs]


def format_cell(value) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if value is None:
        return "inf"
    return str(value)
