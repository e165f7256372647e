"""Closed-form per-slot power allocation and the slot objective pieces.

NRT users get water-filling power (increasing in channel gain); scheduled
RT users get Lambert-W power (decreasing in channel gain, because each RT
packet has a fixed length and a better channel needs less power to meet
the same airtime). A scalar multiplier, found by bisection, packs the RT
airtimes into the slot and prices the leftover time handed to the NRT user.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import SlotObservation, SystemConfig
from .numerics import _w0_core, solve_monotone_root

_E = math.e


@dataclass
class NrtCandidate:
    """The NRT user picked for leftover airtime, with its power and the
    per-second value of giving it airtime."""

    user: int        # global user id
    power: float
    psi_star: float


@dataclass
class RtAllocation:
    """Packed power/airtime assignment for one candidate RT set."""

    set: list        # global RT user ids, ascending
    powers: list     # per member, in [0, p_max]
    airtimes: list   # per member, seconds
    phi: float       # airtime-packing multiplier (0 when the slot is slack)
    objective: float | None = None


def nrt_power(q_i: float, x: float, gain: float, p_max: float) -> float:
    """Water-filling power for an NRT user.

    The water level is the data backlog over the power backlog; the floor
    is the inverse channel gain. With no power backlog (x == 0) the power
    constraint exerts no pressure and the cap is used.
    """
    if gain <= 0.0:
        return 0.0
    if x <= 0.0:
        return p_max
    return min(max(q_i / x - 1.0 / gain, 0.0), p_max)


def nrt_psi(q_i: float, x: float, gain: float, power: float, slot_seconds: float) -> float:
    """Per-second value of NRT airtime: backlog-weighted rate minus the
    power charge."""
    if power <= 0.0:
        return 0.0
    return q_i * math.log1p(power * gain) - x * power / slot_seconds


def select_nrt(state, obs: SlotObservation, config: SystemConfig,
               rng: np.random.Generator) -> NrtCandidate | None:
    """Pick the NRT user with the highest airtime value at its own
    water-filling power; exact ties are broken uniformly at random.

    Returns None when no NRT user has strictly positive value (giving such
    a user airtime cannot improve the slot objective).
    """
    if config.n_nrt == 0:
        return None
    powers = []
    psis = []
    for jj, gid in enumerate(config.nrt_ids):
        gain = float(obs.gains[gid])
        p = nrt_power(float(state.q[jj]), state.x, gain, config.p_max)
        powers.append(p)
        psis.append(nrt_psi(float(state.q[jj]), state.x, gain, p, config.slot_seconds))
    best = max(psis)
    if best <= 0.0:
        return None
    ties = [jj for jj, v in enumerate(psis) if v == best]
    pick = ties[0] if len(ties) == 1 else ties[int(rng.integers(len(ties)))]
    return NrtCandidate(user=config.n_rt + pick, power=powers[pick], psi_star=best)


def _rt_clip_threshold(gain: float, p_max: float) -> float:
    # gain * phi_tilde value at which the unclipped power reaches p_max
    z = 1.0 + p_max * gain
    return z * math.log(z) - z + 1.0


def rt_power(gain: float, phi_tilde: float, p_max: float) -> float:
    """Lambert power for a scheduled RT user at multiplier value phi_tilde.

    Solves the stationarity condition z*log(z) - z + 1 = gain*phi_tilde
    for z = 1 + power*gain via the principal Lambert W branch:

        z = (gain*phi_tilde - 1) / W((gain*phi_tilde - 1) / e),

    capped at p_max. The solution is the exact per-user minimizer of
    airtime * (power charge + leftover-time value), which is what the
    packed slot objective decomposes into; it is strictly increasing in
    phi_tilde and strictly decreasing in gain. At phi_tilde == 0 the
    power is 0 (the user is not worth serving at zero multiplier).

    Raises:
        ValueError: if gain <= 0.
    """
    if gain <= 0.0:
        raise ValueError(f"rt_power needs a positive gain, got {gain!r}")
    if phi_tilde <= 0.0:
        return 0.0
    gp = gain * phi_tilde
    if gp >= _rt_clip_threshold(gain, p_max):
        return p_max
    arg = gp - 1.0
    if abs(arg) <= 1e-6:
        # W-free series around z = e, polished with one Newton step on
        # e*(1+d)*log1p(d) = arg to dodge the 0/0 cancellation.
        d = arg / _E
        resid = _E * (1.0 + d) * math.log1p(d) - arg
        d -= resid / (_E * (math.log1p(d) + 1.0))
        z = _E * (1.0 + d)
    else:
        z = arg / _w0_core(arg / _E)[0]
    return (z - 1.0) / gain


def rt_psi(y_i: float, x: float, power: float, airtime: float,
           slot_seconds: float, served_flag: int = 1) -> float:
    """Slot-objective weight of one RT user: its QoS backlog minus the
    power charge for its airtime. Zero if the user is not scheduled."""
    if not served_flag:
        return 0.0
    return y_i - x * power * airtime / slot_seconds


def _member_gains(set_ids, obs: SlotObservation):
    return [float(obs.gains[i]) for i in set_ids]


def pack_rt_set(set_ids, state, obs: SlotObservation, nrt_psi_star: float,
                config: SystemConfig) -> RtAllocation | None:
    """Pack a candidate RT set into the slot.

    Finds the multiplier phi >= 0 by complementary slackness: if the total
    RT airtime already fits at phi = 0, the leftover goes to the NRT user;
    otherwise phi is raised (by bisection on the strictly decreasing total
    airtime) until the set exactly fills the slot. Every member's power
    follows rt_power at phi_tilde = (nrt_psi_star + phi) * T_s / X. When
    X == 0 power costs nothing and all members transmit at p_max.

    Returns None (infeasible) when the set cannot fit in the slot even
    with every member at p_max, or when the multiplier ceiling is reached
    first.
    """
    if not set_ids:
        raise ValueError("pack_rt_set needs a nonempty set")
    ts = config.slot_seconds
    p_max = config.p_max
    bits = config.packet_bits
    gains = _member_gains(set_ids, obs)
    if any(g <= 0.0 for g in gains):
        return None
    mu_min = [bits / math.log1p(p_max * g) for g in gains]
    if sum(mu_min) > ts:
        return None

    x = state.x
    if x == 0.0:
        return RtAllocation(set=list(set_ids), powers=[p_max] * len(gains),
                            airtimes=list(mu_min), phi=0.0)

    clip_at = [_rt_clip_threshold(g, p_max) / g for g in gains]

    def total_airtime(pt: float) -> float:
        total = 0.0
        for g, mu_floor, clip in zip(gains, mu_min, clip_at):
            if pt >= clip:
                total += mu_floor
                continue
            p = rt_power(g, pt, p_max)
            if p <= 0.0:
                return math.inf
            total += bits / math.log1p(p * g)
        return total

    pt0 = nrt_psi_star * ts / x
    if total_airtime(pt0) <= ts:
        pt_star, phi = pt0, 0.0
    else:
        pt_cap = (nrt_psi_star + config.phi_max) * ts / x
        hi = min(max(2.0 * pt0, 1.0), pt_cap)
        while total_airtime(hi) > ts:
            if hi >= pt_cap:
                return None
            hi = min(4.0 * hi, pt_cap)
        pt_star = solve_monotone_root(
            lambda pt: total_airtime(pt) - ts, pt0, hi,
            tol=max(1e-15 * hi, 1e-30), f_tol=config.phi_tol)
        phi = max(0.0, pt_star * x / ts - nrt_psi_star)

    powers = [min(rt_power(g, pt_star, p_max), p_max) for g in gains]
    airtimes = [bits / math.log1p(p * g) for p, g in zip(powers, gains)]
    return RtAllocation(set=list(set_ids), powers=powers, airtimes=airtimes, phi=phi)


def set_objective(alloc: RtAllocation, nrt: NrtCandidate | None, state,
                  slot_seconds: float) -> float:
    """Slot objective of a packed RT set plus the NRT leftover term.

    The leftover slot time is valued at the NRT candidate's per-second
    worth; with no candidate the leftover is idle and worth nothing.
    """
    total = 0.0
    for uid, power, airtime in zip(alloc.set, alloc.powers, alloc.airtimes):
        total += rt_psi(float(state.y[uid]), state.x, power, airtime, slot_seconds)
    if nrt is not None:
        total += nrt.psi_star * max(slot_seconds - sum(alloc.airtimes), 0.0)
    return total
