"""Shared test utilities: independent oracles and state builders.

The oracles here deliberately avoid the code paths they check. The RT
power oracle solves the stationarity condition by plain bisection on the
rate variable (no Lambert W); the NRT oracle is a dense power grid.
"""

import math

import numpy as np

from dlsched import ControllerState, SlotObservation, SystemConfig


def rt_power_oracle(gain: float, phi_tilde: float, p_max: float) -> float:
    """Solve z*log(z) - z + 1 = gain*phi_tilde by bisection on z, then cap.

    Independent of the Lambert-W implementation.
    """
    if phi_tilde <= 0.0:
        return 0.0
    target = gain * phi_tilde
    z_hi = 1.0 + p_max * gain
    if z_hi * math.log(z_hi) - z_hi + 1.0 <= target:
        return p_max
    lo, hi = 1.0, z_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * math.log(mid) - mid + 1.0 < target:
            lo = mid
        else:
            hi = mid
    return (0.5 * (lo + hi) - 1.0) / gain


def newton_w1() -> float:
    """Lambert W at 1 via Newton on f(w) = w*e^w - 1, started at 0.5."""
    w = 0.5
    for _ in range(60):
        f = w * math.exp(w) - 1.0
        w -= f / (math.exp(w) * (w + 1.0))
    return w


def make_state(config: SystemConfig, q=None, y=None, x=0.0, slot=0) -> ControllerState:
    qv = np.zeros(config.n_nrt) if q is None else np.asarray(q, dtype=float)
    yv = np.zeros(config.n_rt) if y is None else np.asarray(y, dtype=float)
    return ControllerState(q=qv, y=yv, x=float(x), slot=slot)


def make_obs(config: SystemConfig, gains, arrivals) -> SlotObservation:
    return SlotObservation(gains=np.asarray(gains, dtype=float),
                           arrivals=np.asarray(arrivals, dtype=np.int64))
