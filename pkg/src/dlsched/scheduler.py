"""Per-slot set search: the pruned search and its exhaustive oracle.

Both searches enumerate subsets of the arrival-eligible RT users (an RT
packet can only be served in its arrival slot), pack each candidate set,
and keep the best slot objective. The pruned variant skips sets that are
provably non-optimal: a set is dominated when some eligible outsider beats
a member on both QoS backlog and channel gain, strictly. Ties on the
objective go to the smaller set, then to the lexicographically smallest
member list, identically in both searches so their decisions coincide.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .model import SlotObservation, SystemConfig
from .policy import NrtCandidate, RtAllocation, pack_rt_set, select_nrt, set_objective
from .queues import ControllerState, admit

EXHAUSTIVE_MAX_RT = 20


class SizeGuardError(RuntimeError):
    """Exhaustive search refused: too many RT users for 2^N enumeration."""


@dataclass
class SlotDecision:
    """Complete outcome of one slot's scheduling problem."""

    rt_set: list            # scheduled RT user ids, ascending
    nrt_user: int | None    # NRT user holding the leftover airtime
    powers: np.ndarray      # per user, zero if unscheduled
    airtimes: np.ndarray    # per user, seconds
    admissions: np.ndarray  # per NRT user, {0, 1}
    objective: float
    evaluations: int        # candidate sets considered for the objective


def prune_check(set_ids, y, gains, eligible=None) -> bool:
    """True when the set is provably not optimal: some eligible user
    outside the set strictly beats a member on both QoS backlog and gain.

    ``eligible`` defaults to every user index present in ``y``.
    """
    members = set(set_ids)
    if eligible is None:
        eligible = range(len(y))
    for i in eligible:
        if i in members:
            continue
        for j in members:
            if y[i] > y[j] and gains[i] > gains[j]:
                return True
    return False


def _search(state: ControllerState, obs: SlotObservation, config: SystemConfig,
            rng: np.random.Generator, prune: bool) -> SlotDecision:
    nrt = select_nrt(state, obs, config, rng)
    psi_star = nrt.psi_star if nrt is not None else 0.0
    ts = config.slot_seconds

    eligible = [i for i in config.rt_ids if obs.arrivals[i]]
    order = sorted(eligible, key=lambda i: (-float(state.y[i]), i))
    m = len(order)

    dominators = [0] * m
    if prune:
        y = state.y
        g = obs.gains
        for a in range(m):
            ia = order[a]
            for b in range(m):
                ib = order[b]
                if a != b and y[ia] > y[ib] and g[ia] > g[ib]:
                    dominators[b] |= 1 << a
    best_obj = None
    best_key = None
    best_alloc = None
    evaluations = 0
    for size in range(m + 1):
        for combo in itertools.combinations(range(m), size):
            if prune and size:
                mask = 0
                dom = 0
                for p in combo:
                    mask |= 1 << p
                    dom |= dominators[p]
                if dom & ~mask:
                    continue
            evaluations += 1
            if size == 0:
                alloc = RtAllocation(set=[], powers=[], airtimes=[], phi=0.0)
            else:
                ids = sorted(order[p] for p in combo)
                alloc = pack_rt_set(ids, state, obs, psi_star, config)
                if alloc is None:
                    continue
            obj = set_objective(alloc, nrt, state, ts)
            key = (len(alloc.set), tuple(alloc.set))
            if best_obj is None or obj > best_obj or (obj == best_obj and key < best_key):
                best_obj, best_key, best_alloc = obj, key, alloc

    best_alloc.objective = best_obj
    return _build_decision(best_alloc, nrt, state, obs, config, best_obj, evaluations)


def _build_decision(alloc: RtAllocation, nrt: NrtCandidate | None,
                    state: ControllerState, obs: SlotObservation,
                    config: SystemConfig, objective: float,
                    evaluations: int) -> SlotDecision:
    powers = np.zeros(config.n_users)
    airtimes = np.zeros(config.n_users)
    for uid, power, airtime in zip(alloc.set, alloc.powers, alloc.airtimes):
        powers[uid] = power
        airtimes[uid] = airtime
    nrt_user = None
    if nrt is not None:
        nrt_user = nrt.user
        powers[nrt_user] = nrt.power
        airtimes[nrt_user] = max(config.slot_seconds - sum(alloc.airtimes), 0.0)
    admissions = np.array(
        [admit(float(state.q[jj]), int(obs.arrivals[gid]), config.b_max)
         for jj, gid in enumerate(config.nrt_ids)], dtype=np.int64)
    return SlotDecision(rt_set=list(alloc.set), nrt_user=nrt_user, powers=powers,
                        airtimes=airtimes, admissions=admissions,
                        objective=objective, evaluations=evaluations)


def lambert_strict(state: ControllerState, obs: SlotObservation,
                   config: SystemConfig, rng: np.random.Generator) -> SlotDecision:
    """Pruned per-slot search. Skips dominated RT sets; evaluations counts
    only the sets actually considered for the objective."""
    return _search(state, obs, config, rng, prune=True)


def exhaustive_search(state: ControllerState, obs: SlotObservation,
                      config: SystemConfig, rng: np.random.Generator) -> SlotDecision:
    """Unpruned oracle: evaluates every subset of the eligible RT users
    (2^eligible sets), with tie-breaking identical to lambert_strict.

    Raises:
        SizeGuardError: if the configuration has more than 20 RT users.
    """
    if config.n_rt > EXHAUSTIVE_MAX_RT:
        raise SizeGuardError(
            f"exhaustive search limited to {EXHAUSTIVE_MAX_RT} RT users, "
            f"got {config.n_rt}")
    return _search(state, obs, config, rng, prune=False)
