from .battery import BatteryResult, report_for_target, run_battery
from .checks import CheckReport, IntervalCase, Kind, PreconditionViolated, decompose
from .context import AnalysisContext, Side, make_context

__all__ = [
    "AnalysisContext",
    "BatteryResult",
    "CheckReport",
    "IntervalCase",
    "Kind",
    "PreconditionViolated",
    "Side",
    "decompose",
    "make_context",
    "report_for_target",
    "run_battery",
]
