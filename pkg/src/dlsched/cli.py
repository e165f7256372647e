"""Command-line front end: single runs, scheduler-equivalence checks,
complexity sweeps, and the bound report. All numeric output uses 9
significant digits; results are written as RFC-4180-style CSV.
"""

import argparse
import csv
import os
import sys
from dataclasses import dataclass, field

from .model import ConfigError, SystemConfig, _parse_value
from .scheduler import SizeGuardError
from . import sim

CONFIG_ENV_VAR = "DLSCHED_CONFIG"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_GUARD = 3


@dataclass
class ExperimentSpec:
    """Parsed invocation: which experiment to run and with what inputs."""

    command: str
    config_path: str | None = None
    overrides: dict = field(default_factory=dict)
    output_path: str | None = None
    seed: int | None = None


def _fmt(value) -> str:
    return f"{value:.9g}"


def load_config(spec: ExperimentSpec) -> SystemConfig:
    path = spec.config_path or os.environ.get(CONFIG_ENV_VAR)
    config = SystemConfig.from_file(path) if path else SystemConfig()
    overrides = dict(spec.overrides)
    if spec.seed is not None:
        overrides["rng_seed"] = spec.seed
    if overrides:
        merged = {key: getattr(config, key) for key in
                  ("n_rt", "n_nrt", "lambda_", "q", "packet_bits", "slot_seconds",
                   "p_avg", "p_max", "b_max", "mean_gain", "gain_cap",
                   "horizon_slots", "rng_seed", "phi_tol", "phi_max")}
        for key, value in overrides.items():
            if key == "lambda":
                key = "lambda_"
            if key not in merged:
                raise ConfigError(f"unknown config key: {key!r}")
            merged[key] = value
        config = SystemConfig(**merged)
    return config


def _parse_overrides(pairs) -> dict:
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = _parse_value(value.strip())
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dlsched",
        description="Downlink scheduling experiments: run, equivalence, sweep, bound.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help=f"key=value config file (default ${CONFIG_ENV_VAR})")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", dest="overrides",
                       help="override one config field (repeatable)")
        p.add_argument("--seed", type=int, help="override rng_seed")

    p_run = sub.add_parser("run", help="simulate one run and write a metrics CSV")
    common(p_run)
    p_run.add_argument("--algorithm", choices=sorted(sim.ALGORITHMS), default="lambert_strict")
    p_run.add_argument("--output", required=True, help="metrics CSV path")
    p_run.add_argument("--trajectory", help="optional per-slot queue trajectory CSV")

    p_eq = sub.add_parser("equivalence",
                          help="compare both schedulers over sampled slot states")
    common(p_eq)
    p_eq.add_argument("--n-rt", type=int, default=None,
                      help="fix the RT population (default: cycle 2..8)")
    p_eq.add_argument("--samples", type=int, default=1000)

    p_sweep = sub.add_parser("sweep", help="average evaluation counts vs RT population")
    common(p_sweep)
    p_sweep.add_argument("--n-rt-values", default="2,3,4,5,6,7,8",
                         help="comma-separated RT population sizes")
    p_sweep.add_argument("--algorithm", choices=sorted(sim.ALGORITHMS) + ["both"],
                         default="both")
    p_sweep.add_argument("--output", required=True, help="sweep CSV path")
    p_sweep.add_argument("--workers", type=int, default=1)

    p_bound = sub.add_parser("bound", help="print the throughput-gap bound report")
    common(p_bound)

    return parser


def _cmd_run(args, config: SystemConfig) -> int:
    metrics = sim.run(config, algorithm=args.algorithm, trajectory_path=args.trajectory)
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(sim.metrics_csv_header(config))
        writer.writerow(sim.metrics_csv_row(metrics))
    print(f"wrote {args.output}: avg_power={_fmt(metrics.avg_power)} "
          f"avg_evaluations={_fmt(metrics.avg_evaluations)}")
    return EXIT_OK


def _cmd_equivalence(args, config: SystemConfig) -> int:
    n_rt_values = (args.n_rt,) if args.n_rt is not None else (2, 3, 4, 5, 6, 7, 8)
    seed = args.seed if args.seed is not None else config.rng_seed
    report = sim.equivalence_check(config, samples=args.samples, seed=seed,
                                   n_rt_values=n_rt_values)
    print(f"samples={report['samples']} "
          f"max_objective_gap={_fmt(report['max_objective_gap'])} "
          f"decision_mismatches={report['decision_mismatches']} "
          f"mean_eval_ratio={_fmt(report['mean_eval_ratio'])}")
    return EXIT_OK if report["decision_mismatches"] == 0 else EXIT_CHECK_FAILED


def _cmd_sweep(args, config: SystemConfig) -> int:
    n_values = [int(v) for v in str(args.n_rt_values).split(",") if v.strip()]
    algorithms = sorted(sim.ALGORITHMS) if args.algorithm == "both" else [args.algorithm]
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_rt", "algorithm", "avg_evaluations"])
        for algorithm in algorithms:
            for n_rt, avg in sim.complexity_sweep(config, n_values, algorithm,
                                                  workers=args.workers):
                writer.writerow([n_rt, algorithm, _fmt(avg)])
    print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_bound(args, config: SystemConfig) -> int:
    report = sim.theorem4_bound(config)
    print(f"c1={_fmt(report.c1)} gap_bound={_fmt(report.gap_bound)} "
          f"r_max={_fmt(report.r_max)}")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "equivalence": _cmd_equivalence,
    "sweep": _cmd_sweep,
    "bound": _cmd_bound,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = ExperimentSpec(
            command=args.command,
            config_path=args.config,
            overrides=_parse_overrides(getattr(args, "overrides", None)),
            output_path=getattr(args, "output", None),
            seed=args.seed,
        )
        config = load_config(spec)
        return _COMMANDS[spec.command](args, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SizeGuardError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD


def console_entry():
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
