"""Exact simulation of Shortest Lower-Bound First (SLF) scheduling under
epsilon-clairvoyance, an SRPT baseline, and checkers for the local
competitiveness argument behind its ceil(1/epsilon) flow-time guarantee."""

from .core import Instance, Job, Segment, Trace, make_instance, rat
from .opt import brute_force_opt_flow, simulate_srpt
from .slf import simulate_slf

__all__ = [
    "Instance",
    "Job",
    "Segment",
    "Trace",
    "brute_force_opt_flow",
    "make_instance",
    "rat",
    "simulate_slf",
    "simulate_srpt",
]

__version__ = "0.1.0"
