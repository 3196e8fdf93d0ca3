"""Command-line interface.

Subcommands: ``sweep`` (the full protocol), ``baseline`` (random agent),
``humanstats`` (dataset reference row), ``gendata`` (synthetic playtraces),
and ``replay`` (re-run a saved trajectory). Settings come from documented
key=value config files, overridable by flags.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .archive import read_trajectory_actions, Trajectory
from .arousal import load_sessions
from .env import EnvConfig, build_schedule
from .experiment import (
    ExperimentConfig,
    format_summary_table,
    human_stats,
    random_baseline,
    run_sweep,
)
from .explore import build_arousal_context, replay
from .rewards import RewardWeights
from .seeding import derive_seed
from .synthetic import generate_synthetic_sessions

_ENV_FIELD_TYPES = {
    "session_length": float,
    "tick_hz": int,
    "passive_point_interval": float,
    "speed_increase_interval": float,
    "speed_increment": float,
    "base_speed": float,
    "min_speed": float,
    "obstacle_penalty": int,
    "coin_value": int,
    "potion_speed_delta": float,
    "attack_range_s": float,
    "band_near_s": float,
    "band_mid_s": float,
    "spawn_horizon_s": float,
    "spawn_min_gap": float,
    "spawn_max_gap": float,
    "lane_count": int,
}

_EXPERIMENT_INT_KEYS = ("runs_per_lambda", "iterations", "max_rollout_actions",
                        "synthetic_sessions", "master_seed", "subset_size",
                        "schedule_seed", "workers")


def parse_config_file(path: str) -> dict[str, str]:
    """Read a key = value file; '#' starts a comment, blank lines ignored."""
    values: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ValueError(f"{path}: line {lineno}: expected 'key = value'")
            key, _, raw = text.partition("=")
            values[key.strip()] = raw.strip()
    return values


def env_config_from_mapping(values: dict[str, str]) -> EnvConfig:
    kwargs = {}
    for name, caster in _ENV_FIELD_TYPES.items():
        if name in values:
            kwargs[name] = caster(values[name])
    if "object_weights" in values:
        parts = [float(v) for v in values["object_weights"].split(",")]
        kwargs["object_weights"] = tuple(parts)
    return EnvConfig(**kwargs)


def _parse_lambdas(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def experiment_config_from_mapping(values: dict[str, str]) -> ExperimentConfig:
    kwargs: dict = {"env": env_config_from_mapping(values)}
    for key in _EXPERIMENT_INT_KEYS:
        if key in values:
            kwargs[key] = int(values[key])
    if "lambdas" in values:
        kwargs["lambdas"] = _parse_lambdas(values["lambdas"])
    if "window_length" in values:
        kwargs["window_length"] = float(values["window_length"])
    if "dataset_path" in values and values["dataset_path"]:
        kwargs["dataset_path"] = values["dataset_path"]
    if "output_dir" in values:
        kwargs["output_dir"] = values["output_dir"]
    if "vary_schedule_per_run" in values:
        kwargs["vary_schedule_per_run"] = _parse_bool(values["vary_schedule_per_run"])
    if "make_plots" in values:
        kwargs["make_plots"] = _parse_bool(values["make_plots"])
    return ExperimentConfig(**kwargs)


def _load_experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    values = parse_config_file(args.config) if args.config else {}
    config = experiment_config_from_mapping(values)
    overrides: dict = {}
    if getattr(args, "lambdas", None):
        overrides["lambdas"] = _parse_lambdas(args.lambdas)
    for arg_name, field_name in (
        ("runs", "runs_per_lambda"),
        ("iterations", "iterations"),
        ("max_actions", "max_rollout_actions"),
        ("seed", "master_seed"),
        ("out", "output_dir"),
        ("window", "window_length"),
        ("subset", "subset_size"),
        ("schedule_seed", "schedule_seed"),
        ("synthetic", "synthetic_sessions"),
        ("dataset", "dataset_path"),
        ("workers", "workers"),
    ):
        value = getattr(args, arg_name, None)
        if value is not None:
            overrides[field_name] = value
    if getattr(args, "vary_schedule", False):
        overrides["vary_schedule_per_run"] = True
    if getattr(args, "no_plots", False):
        overrides["make_plots"] = False
    return dataclasses.replace(config, **overrides)


def _add_common_options(parser: argparse.ArgumentParser, *, dataset: bool = True) -> None:
    parser.add_argument("--config", help="key = value settings file")
    parser.add_argument("--seed", type=int, help="master seed")
    if dataset:
        group = parser.add_mutually_exclusive_group()
        group.add_argument("--dataset", help="playtrace CSV to load")
        group.add_argument("--synthetic", type=int,
                           help="generate N synthetic sessions instead")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="endless-explore",
        description="Archive-driven exploration of a deterministic endless "
                    "runner with score/arousal-imitation reward blending.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run the full blend-weight sweep")
    _add_common_options(p)
    p.add_argument("--lambdas", help="comma-separated blend weights")
    p.add_argument("--runs", type=int, help="runs per blend weight")
    p.add_argument("--iterations", type=int, help="explorations per run")
    p.add_argument("--max-actions", dest="max_actions", type=int,
                   help="rollout length cap")
    p.add_argument("--window", type=float, help="arousal window length (s)")
    p.add_argument("--subset", type=int, help="sessions per lookup subset")
    p.add_argument("--schedule-seed", dest="schedule_seed", type=int,
                   help="fix the spawn schedule seed")
    p.add_argument("--vary-schedule", dest="vary_schedule", action="store_true",
                   help="reseed the schedule per run")
    p.add_argument("--workers", type=int, help="parallel run workers")
    p.add_argument("--out", help="output directory")
    p.add_argument("--no-plots", dest="no_plots", action="store_true",
                   help="skip figure rendering")

    p = sub.add_parser("baseline", help="random-action agent statistics")
    _add_common_options(p)
    p.add_argument("--runs", type=int, help="number of runs")
    p.add_argument("--schedule-seed", dest="schedule_seed", type=int)

    p = sub.add_parser("humanstats", help="dataset reference statistics")
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--dataset", required=True, help="playtrace CSV to load")
    p.add_argument("--schedule-seed", dest="schedule_seed", type=int)
    p.add_argument("--window", type=float, help="arousal window length (s)")

    p = sub.add_parser("gendata", help="write synthetic playtraces")
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--n", type=int, default=20, help="number of sessions")
    p.add_argument("--window", type=float, default=1.0)
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("replay", help="re-run a saved trajectory")
    p.add_argument("trajectory", help=".traj file (one action name per line)")
    _add_common_options(p)
    p.add_argument("--schedule-seed", dest="schedule_seed", type=int)
    p.add_argument("--lam", type=float, default=0.0, help="blend weight for r_lambda")
    p.add_argument("--subset", type=int, help="sessions per lookup subset")
    p.add_argument("--subset-seed", dest="subset_seed", type=int, default=0,
                   help="subset seed (match runs.csv to reproduce a run)")

    return parser


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_experiment_config(args)
    rows = run_sweep(config)
    print(format_summary_table(rows))
    print(f"\nreports written to {config.output_dir}/")
    return 0


def _cmd_baseline(args: argparse.Namespace) -> int:
    config = _load_experiment_config(args)
    row = random_baseline(config)
    print(format_summary_table([row]))
    return 0


def _cmd_humanstats(args: argparse.Namespace) -> int:
    values = parse_config_file(args.config) if args.config else {}
    env_config = env_config_from_mapping(values)
    master_seed = args.seed if args.seed is not None else 0
    schedule_seed = args.schedule_seed
    if schedule_seed is None:
        schedule_seed = derive_seed(master_seed, "schedule")
    sessions = load_sessions(args.dataset)
    schedule = build_schedule(env_config, schedule_seed)
    window = args.window if args.window is not None else 1.0
    row = human_stats(sessions, env_config, schedule, window)
    print(format_summary_table([row]))
    return 0


def _cmd_gendata(args: argparse.Namespace) -> int:
    values = parse_config_file(args.config) if args.config else {}
    env_config = env_config_from_mapping(values)
    sessions = generate_synthetic_sessions(
        env_config,
        schedule_seed_base=derive_seed(args.seed, "session-schedules"),
        n=args.n,
        seed=derive_seed(args.seed, "sessions"),
        window_length=args.window,
        out_path=args.out,
    )
    print(f"wrote {len(sessions)} sessions to {args.out}")
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    values = parse_config_file(args.config) if args.config else {}
    env_config = env_config_from_mapping(values)
    master_seed = args.seed if args.seed is not None else 0
    schedule_seed = args.schedule_seed
    if schedule_seed is None:
        schedule_seed = derive_seed(master_seed, "schedule")
    schedule = build_schedule(env_config, schedule_seed)
    actions = read_trajectory_actions(args.trajectory)
    trajectory = Trajectory(actions, len(actions), (), (), 0)

    context = None
    if args.dataset or args.synthetic:
        if args.dataset:
            sessions = load_sessions(args.dataset)
        else:
            sessions = generate_synthetic_sessions(
                env_config,
                schedule_seed_base=derive_seed(master_seed, "session-schedules"),
                n=args.synthetic,
                seed=derive_seed(master_seed, "sessions"),
            )
        subset_size = args.subset if args.subset is not None else len(sessions)
        context = build_arousal_context(
            sessions, env_config, subset_seed=args.subset_seed, subset_size=subset_size)

    state, bundle = replay(env_config, schedule, trajectory,
                           RewardWeights(args.lam), context)
    print(f"ticks: {state.tick}  time: {state.time:.2f}s  score: {state.score}")
    print(f"r_b: {bundle.r_b:.6f}  r_a: {bundle.r_a:.6f}  r_lambda: {bundle.r_lambda:.6f}")
    if context is None:
        print("(no dataset given: arousal reward reported as 0)")
    return 0


_COMMANDS = {
    "sweep": _cmd_sweep,
    "baseline": _cmd_baseline,
    "humanstats": _cmd_humanstats,
    "gendata": _cmd_gendata,
    "replay": _cmd_replay,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
