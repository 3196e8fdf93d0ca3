"""Synthetic annotated play sessions, standing in for a human corpus.

Each session is a scripted playthrough of its own seeded schedule, sampled
once per time window. Raw arousal mixes a rising tonic baseline, saturating
excitement from collisions and near-misses (attacked or dodged obstacles),
and a decaying session-start bump. A window containing a collision is
guaranteed to read strictly higher than the previous sample, and the
long-run shape rises the way continuous annotators tend to report.
"""

from __future__ import annotations

import math
import random
from typing import Callable

from .arousal import HumanSession, completed_windows, session_from_raw, write_sessions_csv
from .env import (
    Action,
    ACTIONS,
    BOTTOM,
    CellKey,
    EndlessRunner,
    EnvConfig,
    GameState,
    ObjectKind,
    TOP,
    build_schedule,
)

# Tonic arousal rises roughly linearly over the session; the slope varies
# per session. Event excitement saturates so that long noisy sessions do not
# squash the rest of the trace under min-max normalization, and a decaying
# session-start bump keeps the per-session minimum away from window 0.
AROUSAL_SLOPE_RANGE = (0.006, 0.012)
AROUSAL_EVENT_SCALE = 1.5
AROUSAL_EVENT_SATURATION = 2.0
AROUSAL_NEAR_MISS_WEIGHT = 0.45
AROUSAL_START_BUMP_RANGE = (1.2, 2.2)
AROUSAL_START_DECAY = 5.0
AROUSAL_WOBBLE_AMP = 0.03
AROUSAL_WOBBLE_PERIOD = 32.0
# A window containing a collision always rises by at least this much over
# the previous sample, whatever the decaying terms do.
AROUSAL_COLLISION_MIN_RISE = 0.02

DEFAULT_POLICY_MIX = {"greedy": 2.0, "cautious": 2.0, "noisy": 1.0}

# Per-policy chance of replacing the scripted action with a random one.
_POLICY_NOISE = {"greedy": 0.02, "cautious": 0.05, "noisy": 1.0}


def _move_action(current_lane: int, target_lane: int, attack: bool) -> Action:
    if target_lane == current_lane:
        return Action.ATTACK if attack else Action.NOOP
    if target_lane == TOP:
        return Action.UP_ATTACK if attack else Action.UP
    return Action.DOWN_ATTACK if attack else Action.DOWN


def _nearest(state: GameState, lane: int | None, kind: ObjectKind):
    best = None
    for obj in state.active_objects:
        if obj.kind is not kind:
            continue
        if lane is not None and obj.lane != lane:
            continue
        if best is None or obj.distance < best.distance:
            best = obj
    return best


def greedy_action(env: EndlessRunner, state: GameState) -> Action:
    """Chase the nearest coin; attack obstacles that come within reach on
    the destination lane."""
    cfg = env.config
    reach = state.speed * cfg.attack_range_s
    coin = _nearest(state, None, ObjectKind.COIN)
    target = coin.lane if coin is not None else state.player_lane
    threat = _nearest(state, target, ObjectKind.OBSTACLE)
    attack = threat is not None and threat.distance <= reach
    return _move_action(state.player_lane, target, attack)


def cautious_action(env: EndlessRunner, state: GameState) -> Action:
    """Dodge obstacles with a wide margin; take coins only when safe."""
    cfg = env.config
    my = state.player_lane
    other = TOP if my == BOTTOM else BOTTOM
    margin = state.speed * cfg.band_mid_s
    reach = state.speed * cfg.attack_range_s
    threat_my = _nearest(state, my, ObjectKind.OBSTACLE)
    threat_other = _nearest(state, other, ObjectKind.OBSTACLE)
    danger_my = threat_my is not None and threat_my.distance <= margin
    danger_other = threat_other is not None and threat_other.distance <= margin
    if danger_my:
        if not danger_other:
            return _move_action(my, other, False)
        return Action.ATTACK if threat_my.distance <= reach else Action.NOOP
    coin = _nearest(state, None, ObjectKind.COIN)
    if coin is not None and coin.lane == other and not danger_other:
        return _move_action(my, other, False)
    return Action.NOOP


_SCRIPTED: dict[str, Callable[[EndlessRunner, GameState], Action]] = {
    "greedy": greedy_action,
    "cautious": cautious_action,
}


def generate_synthetic_sessions(env_config: EnvConfig, schedule_seed_base: int, n: int,
                                policy_mix: dict[str, float] | None = None,
                                seed: int = 0, window_length: float = 1.0,
                                out_path: str | None = None) -> list[HumanSession]:
    """Simulate ``n`` annotated sessions, one schedule each.

    ``policy_mix`` weights the scripted policies (greedy coin-seeker,
    cautious avoider, noisy random) per session. When ``out_path`` is given
    the raw traces are also written in the playtrace CSV format.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    mix = dict(DEFAULT_POLICY_MIX if policy_mix is None else policy_mix)
    unknown = set(mix) - set(_POLICY_NOISE)
    if unknown:
        raise ValueError(f"unknown policies in mix: {sorted(unknown)}")
    names = sorted(mix)
    weights = [mix[name] for name in names]
    rng = random.Random(seed)
    if window_length < env_config.tick_dt:
        raise ValueError("window_length must be at least one tick")
    n_windows = int(math.floor(env_config.session_length / window_length + 1e-9))
    if n_windows < 1:
        raise ValueError("session shorter than one window")

    raw_groups: list[tuple[str, list[tuple[float, CellKey, float, float]]]] = []
    for idx in range(n):
        policy = rng.choices(names, weights=weights)[0]
        play_rng = random.Random(rng.randrange(2 ** 63))
        phase = rng.uniform(0.0, 2.0 * math.pi)
        slope = rng.uniform(*AROUSAL_SLOPE_RANGE)
        bump = rng.uniform(*AROUSAL_START_BUMP_RANGE)
        schedule = build_schedule(env_config, schedule_seed_base + idx)
        env = EndlessRunner(env_config, schedule)
        scripted = _SCRIPTED.get(policy)
        noise = _POLICY_NOISE[policy]

        state = env.new_game()
        rows: list[tuple[float, CellKey, float, float]] = []
        collisions = 0
        near_misses = 0
        window_had_collision = False
        prev_raw = None
        done = 0
        while not env.finished(state):
            if scripted is None or play_rng.random() < noise:
                action = ACTIONS[play_rng.randrange(6)]
            else:
                action = scripted(env, state)
            state, events = env.step_detailed(state, action)
            if events.collision:
                collisions += 1
                window_had_collision = True
            near_misses += events.attacked + events.obstacles_passed
            now_done = completed_windows(state.time, window_length)
            if now_done > done and done < n_windows:
                i = done
                excitement = collisions + AROUSAL_NEAR_MISS_WEIGHT * near_misses
                raw = (slope * i
                       + AROUSAL_EVENT_SCALE
                       * (1.0 - math.exp(-excitement / AROUSAL_EVENT_SATURATION))
                       + bump * math.exp(-i / AROUSAL_START_DECAY)
                       + AROUSAL_WOBBLE_AMP * math.sin(
                           2.0 * math.pi * i / AROUSAL_WOBBLE_PERIOD + phase))
                if (window_had_collision and prev_raw is not None
                        and raw <= prev_raw + AROUSAL_COLLISION_MIN_RISE):
                    raw = prev_raw + AROUSAL_COLLISION_MIN_RISE
                rows.append((state.time, env.featurize(state), float(state.score), raw))
                prev_raw = raw
                window_had_collision = False
                done = now_done
        raw_groups.append((f"s{idx:03d}-{policy}", rows))

    if out_path is not None:
        write_sessions_csv(out_path, raw_groups)
    return [session_from_raw(sid, rows) for sid, rows in raw_groups]
