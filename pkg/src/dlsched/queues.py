"""Queue dynamics: NRT data queues, per-RT-user QoS virtual queues, the
power virtual queue, admission control, and a stability diagnostic.

All step functions are pure (old value in, new value out) and apply the
nonnegative projection max(., 0), so trajectories can be replayed exactly.
"""

from dataclasses import dataclass

import numpy as np

from .model import SystemConfig


@dataclass
class ControllerState:
    """All controller backlogs at the start of a slot."""

    q: np.ndarray  # NRT data queues, bits (length n_nrt)
    y: np.ndarray  # RT QoS virtual queues (length n_rt)
    x: float       # power virtual queue
    slot: int

    @classmethod
    def initial(cls, config: SystemConfig) -> "ControllerState":
        return cls(q=np.zeros(config.n_nrt), y=np.zeros(config.n_rt), x=0.0, slot=0)

    def copy(self) -> "ControllerState":
        return ControllerState(q=self.q.copy(), y=self.y.copy(), x=self.x, slot=self.slot)


def admit(q_i: float, a_i: int, b_max: float) -> int:
    """Admission gate for one NRT arrival: admit only while the queue is
    below b_max. Never exceeds the arrival indicator."""
    return int(a_i) if q_i < b_max else 0


def step_data_queue(q_i: float, r_i: int, served_bits: float, packet_bits: float) -> float:
    """One NRT data-queue update: backlog + admitted bits - served bits,
    projected at zero."""
    return max(q_i + packet_bits * r_i - served_bits, 0.0)


def step_qos_queue(y_i: float, a_i: int, q_target: float, served_flag: int) -> float:
    """One QoS virtual-queue update. Each arrival deposits its target
    fraction; each in-deadline service drains one unit."""
    return max(y_i + a_i * q_target - served_flag, 0.0)


def step_power_queue(x: float, energy_this_slot: float, slot_seconds: float,
                     p_avg: float) -> float:
    """One power virtual-queue update: slot energy averaged over the slot,
    less the power budget, projected at zero."""
    return max(x + energy_this_slot / slot_seconds - p_avg, 0.0)


def mean_rate_stability_stat(queue_trajectory) -> float:
    """Final queue value divided by trajectory length.

    Tends to zero for mean-rate-stable queues as the horizon grows; a value
    bounded away from zero flags a violated time-average constraint.
    """
    trajectory = np.asarray(queue_trajectory, dtype=float)
    if trajectory.size == 0:
        raise ValueError("empty trajectory")
    return float(trajectory[-1]) / trajectory.size
