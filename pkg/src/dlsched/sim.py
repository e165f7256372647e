"""The slot loop: draw environment, schedule, update queues, accumulate
metrics. Also the optimality-gap bound evaluator, the complexity sweep,
and a two-scheduler equivalence checker over synthetic slot states.
"""

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import ConfigError, SlotObservation, SystemConfig, draw_slot, rate
from .queues import (ControllerState, step_data_queue, step_power_queue,
                     step_qos_queue)
from .scheduler import exhaustive_search, lambert_strict

ALGORITHMS = {
    "lambert_strict": lambert_strict,
    "exhaustive": exhaustive_search,
}


@dataclass
class RunMetrics:
    """Time-averaged outcomes of one simulation run.

    Throughputs are in packets per slot-second of horizon (served bits over
    L * T_s * K); the delivered variant caps each slot's service at the
    actual backlog. Stability statistics are final queue value over the
    horizon and should shrink toward zero for a feasible load.
    """

    nrt_throughput: np.ndarray        # per NRT user
    delivered_throughput: np.ndarray  # per NRT user, backlog-capped
    avg_power: float
    rt_delivery_ratio: np.ndarray     # served packets / K, per RT user
    y_stability: np.ndarray           # Y_i(K) / K
    x_stability: float                # X(K) / K
    mean_q: np.ndarray                # time-averaged NRT backlog, bits
    avg_evaluations: float            # mean candidate sets per slot
    admitted_rate: np.ndarray         # admissions / K, per NRT user


@dataclass
class BoundReport:
    """Closed-form throughput-gap bound for the configured scenario."""

    c1: float
    gap_bound: float  # c1 / (L * b_max)
    r_max: float      # log(1 + p_max)


def run(config: SystemConfig, algorithm: str = "lambert_strict",
        trajectory_path=None) -> RunMetrics:
    """Simulate horizon_slots slots under the chosen scheduler.

    Deterministic under config.rng_seed. An optional trajectory CSV gets
    one row per slot with the post-update queue values (plus a row for the
    initial state).
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; pick from {sorted(ALGORITHMS)}")
    if config.horizon_slots <= 0:
        raise ConfigError("horizon_slots must be positive for a run")
    decide = ALGORITHMS[algorithm]
    rng = np.random.default_rng(config.rng_seed)
    state = ControllerState.initial(config)

    k_total = config.horizon_slots
    bits = config.packet_bits
    ts = config.slot_seconds
    served_bits = np.zeros(config.n_nrt)
    delivered_bits = np.zeros(config.n_nrt)
    admitted = np.zeros(config.n_nrt)
    q_running = np.zeros(config.n_nrt)
    rt_served = np.zeros(config.n_rt)
    energy_total = 0.0
    eval_total = 0

    writer = None
    traj_file = None
    if trajectory_path is not None:
        traj_file = open(trajectory_path, "w", newline="")
        writer = csv.writer(traj_file)
        writer.writerow(["slot", "X"]
                        + [f"Y_{i + 1}" for i in range(config.n_rt)]
                        + [f"Q_{j + 1}" for j in range(config.n_nrt)])
        _write_state_row(writer, state)
    try:
        for _ in range(k_total):
            obs = draw_slot(config, rng)
            decision = decide(state, obs, config, rng)

            energy = float(np.dot(decision.powers, decision.airtimes))
            energy_total += energy
            eval_total += decision.evaluations

            new_q = np.empty(config.n_nrt)
            for jj, gid in enumerate(config.nrt_ids):
                r = int(decision.admissions[jj])
                if decision.nrt_user == gid:
                    served = decision.airtimes[gid] * rate(float(decision.powers[gid]),
                                                           float(obs.gains[gid]))
                else:
                    served = 0.0
                served_bits[jj] += served
                delivered_bits[jj] += min(served, float(state.q[jj]) + bits * r)
                admitted[jj] += r
                new_q[jj] = step_data_queue(float(state.q[jj]), r, served, bits)

            scheduled = set(decision.rt_set)
            new_y = np.empty(config.n_rt)
            for i in config.rt_ids:
                flag = 1 if i in scheduled else 0
                rt_served[i] += flag
                new_y[i] = step_qos_queue(float(state.y[i]), int(obs.arrivals[i]),
                                          float(config.q[i]), flag)

            new_x = step_power_queue(state.x, energy, ts, config.p_avg)
            state = ControllerState(q=new_q, y=new_y, x=new_x, slot=state.slot + 1)
            q_running += new_q
            if writer is not None:
                _write_state_row(writer, state)
    finally:
        if traj_file is not None:
            traj_file.close()

    return RunMetrics(
        nrt_throughput=served_bits / (bits * ts * k_total),
        delivered_throughput=delivered_bits / (bits * ts * k_total),
        avg_power=energy_total / (k_total * ts),
        rt_delivery_ratio=rt_served / k_total,
        y_stability=state.y / k_total,
        x_stability=state.x / k_total,
        mean_q=q_running / k_total,
        avg_evaluations=eval_total / k_total,
        admitted_rate=admitted / k_total,
    )


def _write_state_row(writer, state: ControllerState):
    writer.writerow([state.slot, f"{state.x:.9g}"]
                    + [f"{v:.9g}" for v in state.y]
                    + [f"{v:.9g}" for v in state.q])


def theorem4_bound(config: SystemConfig) -> BoundReport:
    """Evaluate the closed-form constant bounding the throughput loss of
    the drift-based controller, and the resulting gap C1 / (L * b_max)."""
    r_max = math.log1p(config.p_max)
    c1 = (float(np.sum(config.q ** 2 + 1.0))
          + config.p_max ** 2
          + config.p_avg ** 2
          + config.n_nrt * config.packet_bits ** 2
          + config.n_nrt * config.slot_seconds ** 2 * r_max ** 2)
    return BoundReport(c1=c1, gap_bound=c1 / (config.packet_bits * config.b_max),
                       r_max=r_max)


def _sweep_one(args):
    config, algorithm = args
    metrics = run(config, algorithm)
    return config.n_rt, metrics.avg_evaluations


def complexity_sweep(base_config: SystemConfig, n_rt_values, algorithm: str,
                     workers: int = 1):
    """Average per-slot objective evaluations as the RT population grows.

    One run per n_rt value with the same seed; returns [(n_rt, avg)] in
    the order given. workers > 1 runs the sweep points in parallel
    processes (results are still ordered by the input sequence).
    """
    jobs = [(base_config.replace(n_rt=int(n)), algorithm) for n in n_rt_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, jobs))
    return [_sweep_one(job) for job in jobs]


def sample_state(config: SystemConfig, rng: np.random.Generator,
                 zero_x: bool = False):
    """One synthetic mid-run slot state plus observation, for scheduler
    comparisons outside a full simulation."""
    state = ControllerState(
        q=rng.uniform(0.0, config.b_max + config.packet_bits, config.n_nrt),
        y=rng.uniform(0.0, 150.0, config.n_rt),
        x=0.0 if zero_x else float(rng.uniform(0.05, 25.0)),
        slot=0,
    )
    obs = SlotObservation(
        gains=np.minimum(rng.exponential(config.mean_gain), config.gain_cap),
        arrivals=(rng.random(config.n_users) < 0.6).astype(np.int64),
    )
    return state, obs


def equivalence_check(config: SystemConfig, samples: int, seed: int = 0,
                      n_rt_values=(2, 3, 4, 5, 6, 7, 8)) -> dict:
    """Run both schedulers on random slot states and compare decisions.

    Each sampled state is decided twice with identically seeded tie-break
    generators. Returns the worst objective gap (expected 0: identical
    arithmetic path), the number of differing decisions, and the mean
    pruned/exhaustive evaluation ratio.
    """
    state_rng = np.random.default_rng(seed)
    max_gap = 0.0
    mismatches = 0
    eval_ratio_sum = 0.0
    for idx in range(samples):
        n_rt = int(n_rt_values[idx % len(n_rt_values)])
        cfg = config.replace(n_rt=n_rt)
        state, obs = sample_state(cfg, state_rng, zero_x=(idx % 97 == 0))
        rng_a = np.random.default_rng(seed * 1_000_003 + idx)
        rng_b = np.random.default_rng(seed * 1_000_003 + idx)
        a = lambert_strict(state, obs, cfg, rng_a)
        b = exhaustive_search(state, obs, cfg, rng_b)
        max_gap = max(max_gap, abs(a.objective - b.objective))
        same = (a.rt_set == b.rt_set and a.nrt_user == b.nrt_user
                and np.array_equal(a.powers, b.powers)
                and np.array_equal(a.airtimes, b.airtimes)
                and np.array_equal(a.admissions, b.admissions))
        if not same:
            mismatches += 1
        if a.evaluations > b.evaluations:
            raise AssertionError("pruned search evaluated more sets than exhaustive")
        eval_ratio_sum += a.evaluations / b.evaluations
    return {
        "samples": samples,
        "max_objective_gap": max_gap,
        "decision_mismatches": mismatches,
        "mean_eval_ratio": eval_ratio_sum / max(samples, 1),
    }


def metrics_csv_header(config: SystemConfig):
    """Column names for the one-row metrics CSV (stable ordering)."""
    nrt = range(1, config.n_nrt + 1)
    rt = range(1, config.n_rt + 1)
    return ([f"nrt_throughput_{j}" for j in nrt]
            + [f"delivered_throughput_{j}" for j in nrt]
            + ["avg_power"]
            + [f"rt_delivery_ratio_{i}" for i in rt]
            + [f"y_stability_{i}" for i in rt]
            + ["x_stability"]
            + [f"mean_q_{j}" for j in nrt]
            + ["avg_evaluations"]
            + [f"admitted_rate_{j}" for j in nrt])


def metrics_csv_row(metrics: RunMetrics):
    values = (list(metrics.nrt_throughput) + list(metrics.delivered_throughput)
              + [metrics.avg_power] + list(metrics.rt_delivery_ratio)
              + list(metrics.y_stability) + [metrics.x_stability]
              + list(metrics.mean_q) + [metrics.avg_evaluations]
              + list(metrics.admitted_rate))
    return [f"{v:.9g}" for v in values]
