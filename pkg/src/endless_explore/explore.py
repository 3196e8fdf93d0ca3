"""The exploration loop: select a cell, restore its snapshot, roll out
random actions, and fold every visited state back into the archive.

Rewards are cumulative along a trajectory: the behavior reward is the
normalized score at the visited tick, and the arousal reward is the running
mean of per-window imitation accuracy over the windows completed so far.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from typing import Sequence

from .archive import Archive, Cell, Trajectory
from .arousal import (
    ArousalTrace,
    HumanSession,
    NearestArousalLookup,
    completed_windows,
    mean_arousal_trace,
    subset_sessions,
)
from .env import ACTIONS, Action, EndlessRunner, EnvConfig, GameState, Snapshot, SpawnSchedule
from .rewards import RewardBundle, RewardWeights, behavior_reward, blended_reward
from .seeding import derive_seed


@dataclass(frozen=True)
class ExploreParams:
    iterations: int = 4000
    max_rollout_actions: int = 20
    rng_seed: int = 0
    weights: RewardWeights = field(default_factory=lambda: RewardWeights(0.0))

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.max_rollout_actions < 1:
            raise ValueError("max_rollout_actions must be >= 1")


@dataclass
class ArousalContext:
    """Everything a run needs to score arousal imitation: the consensus
    target trace and the nearest-state lookup over a session subset."""

    trace: ArousalTrace
    lookup: NearestArousalLookup
    window_length: float


def build_arousal_context(sessions: Sequence[HumanSession], config: EnvConfig,
                          window_length: float = 1.0, subset_seed: int = 0,
                          subset_size: int = 16) -> ArousalContext:
    trace = mean_arousal_trace(sessions, window_length, session_length=config.session_length)
    lookup = NearestArousalLookup(subset_sessions(sessions, subset_seed, subset_size))
    return ArousalContext(trace, lookup, window_length)


def rollout(env: EndlessRunner, state: GameState, max_actions: int,
            rng: random.Random) -> list[tuple[Action, GameState]]:
    """Take up to ``max_actions`` uniform random actions, truncating at the
    session end. Returns the (action, successor state) pairs in order."""
    steps = []
    for _ in range(max_actions):
        if env.finished(state):
            break
        action = ACTIONS[rng.randrange(6)]
        state = env.step(state, action)
        steps.append((action, state))
    return steps


def _cumulative_arousal_sum(h_history: Sequence[float], a_history: Sequence[float]) -> float:
    # Left-to-right, matching arousal_reward exactly.
    total = 0.0
    for h, a in zip(h_history, a_history):
        total += 1.0 - abs(h - a)
    return total


def run_exploration(config: EnvConfig, schedule: SpawnSchedule,
                    sessions: Sequence[HumanSession], params: ExploreParams,
                    *, window_length: float = 1.0, subset_size: int = 16,
                    subset_seed: int | None = None,
                    context: ArousalContext | None = None,
                    log_path: str | None = None) -> Archive:
    """Run the full exploration phase and return the resulting archive.

    Every iteration selects a uniformly random archived cell, restores its
    snapshot, rolls out random actions, and offers each visited state to the
    archive with its cumulative rewards. The initial state is seeded as a
    zero-length-trajectory cell so selection is always defined.
    """
    env = EndlessRunner(config, schedule)
    if context is None:
        if subset_seed is None:
            subset_seed = derive_seed(params.rng_seed, "subset")
        context = build_arousal_context(
            sessions, config, window_length, subset_seed, subset_size)
    trace_values = context.trace.values
    n_trace = len(trace_values)
    wl = context.window_length
    lookup = context.lookup
    lam = params.weights.lam
    optimal = env.optimal_score()

    rng = random.Random(params.rng_seed)
    archive = Archive()

    start = env.new_game()
    # No windows observed yet: the arousal reward defaults to 0.
    seed_cell = Cell(
        key=env.featurize(start),
        trajectory=Trajectory((), 0, (), (), 0),
        snapshot=Snapshot(start),
        r_b=behavior_reward(0, optimal),
        r_a=0.0,
        r_lambda=blended_reward(0.0, behavior_reward(0, optimal), params.weights),
    )
    archive.insert_or_update(seed_cell)

    log_rows = [] if log_path is not None else None

    for iteration in range(params.iterations):
        cell = archive.select_cell(rng)
        state = cell.snapshot.state
        actions = list(cell.trajectory.actions)
        h_hist = list(cell.trajectory.h_history)
        a_hist = list(cell.trajectory.a_history)
        running = _cumulative_arousal_sum(h_hist, a_hist)

        for action, state in rollout(env, state, params.max_rollout_actions, rng):
            actions.append(action)
            key = env.featurize(state)
            done = completed_windows(state.time, wl)
            while len(h_hist) < done and len(h_hist) < n_trace:
                h_value = lookup.estimate(key).value
                a_value = trace_values[len(h_hist)]
                h_hist.append(h_value)
                a_hist.append(a_value)
                running += 1.0 - abs(h_value - a_value)
            n = len(h_hist)
            r_b = behavior_reward(state.score, optimal)
            r_a = running / n if n else 0.0
            r_lambda = lam * r_a + (1.0 - lam) * r_b
            candidate = Cell(
                key=key,
                trajectory=Trajectory(tuple(actions), state.tick,
                                      tuple(h_hist), tuple(a_hist), state.score),
                snapshot=Snapshot(state),
                r_b=r_b,
                r_a=r_a,
                r_lambda=r_lambda,
            )
            archive.insert_or_update(candidate)

        if log_rows is not None:
            best = archive.current_best
            log_rows.append((iteration, len(archive), best.r_b, best.r_a, best.r_lambda))

    if log_rows is not None:
        with open(log_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "archive_size", "best_r_b", "best_r_a", "best_r_lambda"])
            for row in log_rows:
                writer.writerow([row[0], row[1], repr(row[2]), repr(row[3]), repr(row[4])])

    return archive


def replay(config: EnvConfig, schedule: SpawnSchedule, trajectory: Trajectory,
           weights: RewardWeights,
           context: ArousalContext | None = None) -> tuple[GameState, RewardBundle]:
    """Re-simulate a trajectory from the initial state.

    With an arousal context the per-window histories are rebuilt from
    scratch (full verification); without one the trajectory's stored
    histories supply the arousal reward.
    """
    env = EndlessRunner(config, schedule)
    if len(trajectory.actions) > env.session_ticks:
        raise ValueError(
            f"trajectory of {len(trajectory.actions)} actions exceeds the "
            f"{env.session_ticks}-tick session")
    optimal = env.optimal_score()
    state = env.new_game()
    if context is None:
        for action in trajectory.actions:
            state = env.step(state, action)
        h_hist = list(trajectory.h_history)
        a_hist = list(trajectory.a_history)
        running = _cumulative_arousal_sum(h_hist, a_hist)
    else:
        trace_values = context.trace.values
        n_trace = len(trace_values)
        wl = context.window_length
        h_hist: list[float] = []
        a_hist: list[float] = []
        running = 0.0
        for action in trajectory.actions:
            state = env.step(state, action)
            done = completed_windows(state.time, wl)
            while len(h_hist) < done and len(h_hist) < n_trace:
                h_value = context.lookup.estimate(env.featurize(state)).value
                a_value = trace_values[len(h_hist)]
                h_hist.append(h_value)
                a_hist.append(a_value)
                running += 1.0 - abs(h_value - a_value)
    n = len(h_hist)
    r_b = behavior_reward(state.score, optimal)
    r_a = running / n if n else 0.0
    r_lambda = weights.lam * r_a + (1.0 - weights.lam) * r_b
    return state, RewardBundle(r_b, r_a, r_lambda)
