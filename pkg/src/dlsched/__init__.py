"""Slotted-time downlink scheduling simulator with closed-form power
allocation for mixed real-time / non-real-time traffic under an average
power constraint."""

from .model import ConfigError, SlotObservation, SystemConfig, draw_slot, rate, rt_airtime
from .numerics import LambertWResult, lambert_w0, solve_monotone_root
from .policy import (NrtCandidate, RtAllocation, nrt_power, nrt_psi, pack_rt_set,
                     rt_power, rt_psi, select_nrt, set_objective)
from .queues import (ControllerState, admit, mean_rate_stability_stat,
                     step_data_queue, step_power_queue, step_qos_queue)
from .scheduler import (SizeGuardError, SlotDecision, exhaustive_search,
                        lambert_strict, prune_check)
from .sim import (BoundReport, RunMetrics, complexity_sweep, equivalence_check,
                  metrics_csv_header, metrics_csv_row, run, sample_state,
                  theorem4_bound)

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "ConfigError", "ControllerState", "LambertWResult",
    "NrtCandidate", "RtAllocation", "RunMetrics", "SizeGuardError",
    "SlotDecision", "SlotObservation", "SystemConfig", "admit",
    "complexity_sweep", "draw_slot", "equivalence_check", "exhaustive_search",
    "lambert_strict", "lambert_w0", "mean_rate_stability_stat",
    "metrics_csv_header", "metrics_csv_row", "nrt_power", "nrt_psi",
    "pack_rt_set", "prune_check", "rate", "rt_airtime", "rt_power", "rt_psi",
    "run", "sample_state", "select_nrt", "set_objective",
    "solve_monotone_root", "step_data_queue", "step_power_queue",
    "step_qos_queue", "theorem4_bound",
]
