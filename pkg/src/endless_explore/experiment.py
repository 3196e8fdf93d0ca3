"""Sweep harness: repeated exploration runs across blend weights, plus the
random baseline and human reference statistics, with 95% confidence
intervals and CSV reports.

Outputs per sweep (all deterministic in the master seed):

- ``summary.csv``: one row per blend weight plus random and human rows.
- ``runs.csv``: the per-run rewards behind every summary row.
- ``curves_<label>.csv``: per-tick cumulative rewards of the best trajectory,
  averaged over runs with confidence bands.
- ``archive_<label>_<run>.csv`` and ``best_<label>_<run>.traj``: final
  archive and best trajectory of each run.
- ``schedule.csv`` and, when synthetic data is generated,
  ``synthetic_sessions.csv``.
"""

from __future__ import annotations

import csv
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from scipy import stats as scipy_stats

from .archive import write_trajectory
from .arousal import (
    HumanSession,
    arousal_reward,
    completed_windows,
    load_sessions,
    mean_arousal_trace,
    session_window_means,
)
from .env import (
    ACTIONS,
    EndlessRunner,
    EnvConfig,
    SpawnSchedule,
    build_schedule,
    write_schedule_csv,
)
from .explore import ArousalContext, ExploreParams, build_arousal_context, run_exploration
from .rewards import RewardWeights, behavior_reward
from .seeding import derive_seed
from .synthetic import generate_synthetic_sessions


@dataclass(frozen=True)
class ExperimentConfig:
    lambdas: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    runs_per_lambda: int = 5
    iterations: int = 4000
    max_rollout_actions: int = 20
    env: EnvConfig = field(default_factory=EnvConfig)
    dataset_path: str | None = None
    synthetic_sessions: int = 0
    output_dir: str = "out"
    master_seed: int = 0
    window_length: float = 1.0
    subset_size: int = 16
    schedule_seed: int | None = None
    vary_schedule_per_run: bool = False
    make_plots: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.lambdas:
            raise ValueError("need at least one lambda value")
        if any(not 0.0 <= lam <= 1.0 for lam in self.lambdas):
            raise ValueError("lambdas must lie within [0, 1]")
        if self.runs_per_lambda < 1:
            raise ValueError("runs_per_lambda must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.synthetic_sessions < 0:
            raise ValueError("synthetic_sessions must be >= 0")


@dataclass(frozen=True)
class SummaryRow:
    """One table row; the blended-reward columns are None for the random
    and human rows, which are not produced by exploration."""

    label: str
    mean_r_b: float
    ci_r_b: float
    mean_r_a: float
    ci_r_a: float
    mean_r_lambda: float | None = None
    ci_r_lambda: float | None = None


def confidence_interval(samples: Sequence[float]) -> tuple[float, float]:
    """Mean and 95% Student-t half-width; a single sample (or identical
    samples) has width exactly 0."""
    n = len(samples)
    if n == 0:
        raise ValueError("need at least one sample")
    first = samples[0]
    if all(x == first for x in samples):
        return float(first), 0.0
    mean = sum(samples) / n
    var = sum((x - mean) ** 2 for x in samples) / (n - 1)
    t = float(scipy_stats.t.ppf(0.975, n - 1))
    return mean, t * math.sqrt(var / n)


def lambda_label(lam: float) -> str:
    return f"lambda_{lam:.2f}"


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(value)


def human_stats(sessions: Sequence[HumanSession], env_config: EnvConfig,
                schedule: SpawnSchedule, window_length: float = 1.0) -> SummaryRow:
    """Average human performance: final scores normalized against the
    reference schedule's optimal, and per-session imitation accuracy of the
    consensus arousal trace."""
    if len(sessions) < 2:
        raise ValueError("need at least two sessions for human statistics")
    env = EndlessRunner(env_config, schedule)
    optimal = env.optimal_score()
    trace = mean_arousal_trace(sessions, window_length,
                               session_length=env_config.session_length)
    r_b_samples = []
    r_a_samples = []
    for session in sessions:
        r_b_samples.append(behavior_reward(session.samples[-1].score, optimal))
        means = session_window_means(session, window_length, len(trace.values))
        h_vals = []
        a_vals = []
        for value, target in zip(means, trace.values):
            if value is not None:
                h_vals.append(value)
                a_vals.append(target)
        r_a_samples.append(arousal_reward(h_vals, a_vals))
    mean_b, ci_b = confidence_interval(r_b_samples)
    mean_a, ci_a = confidence_interval(r_a_samples)
    return SummaryRow("human", mean_b, ci_b, mean_a, ci_a)


def _per_tick_rewards(env: EndlessRunner, actions: Sequence, context: ArousalContext,
                      lam: float | None) -> list[tuple[float, float, float | None]]:
    """Cumulative (r_b, r_a, r_lambda) after each action of a replay."""
    optimal = env.optimal_score()
    trace_values = context.trace.values
    n_trace = len(trace_values)
    wl = context.window_length
    state = env.new_game()
    h_count = 0
    running = 0.0
    rows = []
    for action in actions:
        state = env.step(state, action)
        done = completed_windows(state.time, wl)
        while h_count < done and h_count < n_trace:
            h_value = context.lookup.estimate(env.featurize(state)).value
            running += 1.0 - abs(h_value - trace_values[h_count])
            h_count += 1
        r_b = behavior_reward(state.score, optimal)
        r_a = running / h_count if h_count else 0.0
        r_l = lam * r_a + (1.0 - lam) * r_b if lam is not None else None
        rows.append((r_b, r_a, r_l))
    return rows


def _random_play(env: EndlessRunner, rng: random.Random) -> list:
    state = env.new_game()
    actions = []
    while not env.finished(state):
        action = ACTIONS[rng.randrange(6)]
        state = env.step(state, action)
        actions.append(action)
    return actions


@dataclass(frozen=True)
class RunResult:
    label: str
    run: int
    seed: int
    subset_seed: int
    r_b: float
    r_a: float
    r_lambda: float | None
    curve: tuple[tuple[float, float, float | None], ...]


def _explore_job(args) -> RunResult:
    (config, schedule, sessions, lam, li, ri, out_dir) = args
    seed = derive_seed(config.master_seed, "explore", li, ri)
    subset_seed = derive_seed(config.master_seed, "subset", li, ri)
    context = build_arousal_context(sessions, config.env, config.window_length,
                                    subset_seed, config.subset_size)
    params = ExploreParams(config.iterations, config.max_rollout_actions,
                           seed, RewardWeights(lam))
    archive = run_exploration(config.env, schedule, sessions, params,
                              window_length=config.window_length, context=context)
    best = archive.best_cell()
    label = lambda_label(lam)
    archive.write_csv(os.path.join(out_dir, f"archive_{label}_run{ri + 1}.csv"))
    write_trajectory(best.trajectory, os.path.join(out_dir, f"best_{label}_run{ri + 1}.traj"))
    env = EndlessRunner(config.env, schedule)
    curve = tuple(_per_tick_rewards(env, best.trajectory.actions, context, lam))
    return RunResult(label, ri + 1, seed, subset_seed,
                     best.r_b, best.r_a, best.r_lambda, curve)


def _baseline_job(args) -> RunResult:
    (config, schedule, sessions, ri) = args
    seed = derive_seed(config.master_seed, "random", ri)
    subset_seed = derive_seed(config.master_seed, "subset", "random", ri)
    context = build_arousal_context(sessions, config.env, config.window_length,
                                    subset_seed, config.subset_size)
    env = EndlessRunner(config.env, schedule)
    actions = _random_play(env, random.Random(seed))
    curve = tuple(_per_tick_rewards(env, actions, context, None))
    r_b, r_a, _ = curve[-1]
    return RunResult("random", ri + 1, seed, subset_seed, r_b, r_a, None, curve)


def random_baseline(config: ExperimentConfig,
                    sessions: Sequence[HumanSession] | None = None,
                    schedule: SpawnSchedule | None = None) -> SummaryRow:
    """Play full sessions with uniform random actions; arousal is estimated
    with the same nearest-state lookup the explorer uses."""
    if sessions is None:
        sessions = _resolve_sessions(config)
    if schedule is None:
        schedule = _resolve_schedule(config)
    results = [_baseline_job((config, schedule, sessions, ri))
               for ri in range(config.runs_per_lambda)]
    return _summarize("random", results)


def _summarize(label: str, results: Sequence[RunResult]) -> SummaryRow:
    mean_b, ci_b = confidence_interval([r.r_b for r in results])
    mean_a, ci_a = confidence_interval([r.r_a for r in results])
    if any(r.r_lambda is None for r in results):
        return SummaryRow(label, mean_b, ci_b, mean_a, ci_a)
    mean_l, ci_l = confidence_interval([r.r_lambda for r in results])
    return SummaryRow(label, mean_b, ci_b, mean_a, ci_a, mean_l, ci_l)


def _resolve_sessions(config: ExperimentConfig,
                      out_dir: str | None = None) -> list[HumanSession]:
    if config.dataset_path is not None:
        return load_sessions(config.dataset_path)
    if config.synthetic_sessions > 0:
        out_path = None
        if out_dir is not None:
            out_path = os.path.join(out_dir, "synthetic_sessions.csv")
        return generate_synthetic_sessions(
            config.env,
            schedule_seed_base=derive_seed(config.master_seed, "session-schedules"),
            n=config.synthetic_sessions,
            seed=derive_seed(config.master_seed, "sessions"),
            window_length=config.window_length,
            out_path=out_path,
        )
    raise ValueError("no dataset path given and synthetic generation not requested")


def _resolve_schedule(config: ExperimentConfig) -> SpawnSchedule:
    seed = config.schedule_seed
    if seed is None:
        seed = derive_seed(config.master_seed, "schedule")
    return build_schedule(config.env, seed)


def _write_runs_csv(path: str, results: Sequence[RunResult]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "run", "seed", "subset_seed", "r_b", "r_a", "r_lambda"])
        for r in results:
            writer.writerow([r.label, r.run, r.seed, r.subset_seed,
                             repr(r.r_b), repr(r.r_a), _fmt(r.r_lambda)])


def _write_summary_csv(path: str, rows: Sequence[SummaryRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "mean_r_b", "ci_r_b", "mean_r_a", "ci_r_a",
                         "mean_r_lambda", "ci_r_lambda"])
        for row in rows:
            writer.writerow([row.label, repr(row.mean_r_b), repr(row.ci_r_b),
                             repr(row.mean_r_a), repr(row.ci_r_a),
                             _fmt(row.mean_r_lambda), _fmt(row.ci_r_lambda)])


def _write_curves_csv(path: str, tick_dt: float, results: Sequence[RunResult]) -> None:
    """Average the per-run curves tick by tick; rows report how many runs
    were still going at that tick."""
    max_len = max(len(r.curve) for r in results)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tick", "time_s", "n_runs",
                         "mean_r_b", "ci_r_b", "mean_r_a", "ci_r_a",
                         "mean_r_lambda", "ci_r_lambda"])
        for t in range(max_len):
            alive = [r.curve[t] for r in results if t < len(r.curve)]
            b_mean, b_ci = confidence_interval([v[0] for v in alive])
            a_mean, a_ci = confidence_interval([v[1] for v in alive])
            if any(v[2] is None for v in alive):
                l_mean = l_ci = None
            else:
                l_mean, l_ci = confidence_interval([v[2] for v in alive])
            writer.writerow([t + 1, repr((t + 1) * tick_dt), len(alive),
                             repr(b_mean), repr(b_ci), repr(a_mean), repr(a_ci),
                             _fmt(l_mean), _fmt(l_ci)])


def _write_run_config(path: str, config: ExperimentConfig, schedule_seed: int) -> None:
    lines = [
        f"lambdas = {','.join(repr(v) for v in config.lambdas)}",
        f"runs_per_lambda = {config.runs_per_lambda}",
        f"iterations = {config.iterations}",
        f"max_rollout_actions = {config.max_rollout_actions}",
        f"master_seed = {config.master_seed}",
        f"schedule_seed = {schedule_seed}",
        f"window_length = {repr(config.window_length)}",
        f"subset_size = {config.subset_size}",
        f"dataset_path = {config.dataset_path or ''}",
        f"synthetic_sessions = {config.synthetic_sessions}",
        f"vary_schedule_per_run = {config.vary_schedule_per_run}",
    ]
    env = config.env
    for name in ("session_length", "tick_hz", "passive_point_interval",
                 "speed_increase_interval", "speed_increment", "base_speed",
                 "min_speed", "obstacle_penalty", "coin_value", "potion_speed_delta",
                 "attack_range_s", "band_near_s", "band_mid_s", "spawn_horizon_s",
                 "spawn_min_gap", "spawn_max_gap"):
        lines.append(f"{name} = {getattr(env, name)!r}")
    lines.append(f"object_weights = {','.join(repr(v) for v in env.object_weights)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def run_sweep(config: ExperimentConfig) -> list[SummaryRow]:
    """Run the whole protocol: every (lambda, run) exploration, the random
    baseline, and the human reference; write all reports to
    ``config.output_dir`` and return the summary rows."""
    out_dir = config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    sessions = _resolve_sessions(config, out_dir)
    schedule_seed = config.schedule_seed
    if schedule_seed is None:
        schedule_seed = derive_seed(config.master_seed, "schedule")
    schedule = build_schedule(config.env, schedule_seed)
    write_schedule_csv(schedule, os.path.join(out_dir, "schedule.csv"))
    _write_run_config(os.path.join(out_dir, "run_config.txt"), config, schedule_seed)

    jobs = []
    for li, lam in enumerate(config.lambdas):
        for ri in range(config.runs_per_lambda):
            run_schedule = schedule
            if config.vary_schedule_per_run:
                run_schedule = build_schedule(
                    config.env, derive_seed(config.master_seed, "schedule", li, ri))
            jobs.append((config, run_schedule, sessions, lam, li, ri, out_dir))

    all_results: list[RunResult] = []
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for result in pool.map(_explore_job, jobs):
                all_results.append(result)
    else:
        for job in jobs:
            all_results.append(_explore_job(job))

    baseline_results = [_baseline_job((config, schedule, sessions, ri))
                        for ri in range(config.runs_per_lambda)]
    all_results.extend(baseline_results)

    rows: list[SummaryRow] = []
    for lam in config.lambdas:
        label = lambda_label(lam)
        rows.append(_summarize(label, [r for r in all_results if r.label == label]))
    rows.append(_summarize("random", baseline_results))
    rows.append(human_stats(sessions, config.env, schedule, config.window_length))

    _write_runs_csv(os.path.join(out_dir, "runs.csv"), all_results)
    _write_summary_csv(os.path.join(out_dir, "summary.csv"), rows)
    by_label: dict[str, list[RunResult]] = {}
    for r in all_results:
        by_label.setdefault(r.label, []).append(r)
    for label, results in by_label.items():
        _write_curves_csv(os.path.join(out_dir, f"curves_{label}.csv"),
                          config.env.tick_dt, results)

    if config.make_plots:
        from .plots import render_sweep_figures

        render_sweep_figures(out_dir)

    return rows


def format_summary_table(rows: Sequence[SummaryRow]) -> str:
    """Fixed-width table with rewards at 2 decimals and intervals at 4."""
    def cell(mean: float | None, ci: float | None) -> str:
        if mean is None:
            return "n/a"
        return f"{mean:.2f} (±{ci:.4f})"

    header = f"{'setup':<14} {'r_b':<18} {'r_a':<18} {'r_lambda':<18}"
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(
            f"{row.label:<14} {cell(row.mean_r_b, row.ci_r_b):<18} "
            f"{cell(row.mean_r_a, row.ci_r_a):<18} "
            f"{cell(row.mean_r_lambda, row.ci_r_lambda):<18}")
    return "\n".join(lines)
