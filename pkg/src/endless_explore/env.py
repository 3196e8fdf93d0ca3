"""Deterministic two-lane endless-runner simulation.

The game is fully determinized: object spawns come from a seeded schedule,
states are immutable values, and stepping the same state with the same
action always produces an identical successor. That makes snapshots free
(a state *is* its own save) and replays bit-exact.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

TOP = 0
BOTTOM = 1
LANE_NAMES = ("top", "bottom")

# Band contents, ordered so that max() gives obstacles priority over items.
BAND_EMPTY = 0
BAND_ITEM = 1
BAND_OBSTACLE = 2


class Action(Enum):
    """The six player actions. Values are one-char codes used in exports."""

    UP = "U"
    DOWN = "D"
    UP_ATTACK = "u"
    DOWN_ATTACK = "d"
    ATTACK = "A"
    NOOP = "."


ACTIONS = tuple(Action)
_CODE_TO_ACTION = {a.value: a for a in Action}
_NAME_TO_ACTION = {a.name: a for a in Action}

_LANE_CHANGES = {Action.UP: TOP, Action.UP_ATTACK: TOP,
                 Action.DOWN: BOTTOM, Action.DOWN_ATTACK: BOTTOM}
_ATTACK_ACTIONS = frozenset((Action.ATTACK, Action.UP_ATTACK, Action.DOWN_ATTACK))


class ObjectKind(Enum):
    COIN = "coin"
    POTION = "potion"
    OBSTACLE = "obstacle"


class SessionOver(RuntimeError):
    """Raised when stepping a game whose session has already ended."""


@dataclass(frozen=True)
class EnvConfig:
    """Environment constants.

    Band thresholds and the attack range are expressed as seconds of travel
    time at the current speed, so the near/mid/far abstraction keeps its
    meaning as the game speeds up. Distances are recovered per state as
    ``seconds * state.speed``.
    """

    session_length: float = 120.0
    tick_hz: int = 4
    passive_point_interval: float = 3.0
    speed_increase_interval: float = 10.0
    speed_increment: float = 1.0
    base_speed: float = 8.0
    min_speed: float = 2.0
    obstacle_penalty: int = 10
    coin_value: int = 1
    potion_speed_delta: float = 2.0
    attack_range_s: float = 1.0
    band_near_s: float = 1.0
    band_mid_s: float = 2.5
    spawn_horizon_s: float = 3.5
    spawn_min_gap: float = 0.6
    spawn_max_gap: float = 1.4
    object_weights: tuple[float, float, float] = (3.0, 1.0, 4.0)
    lane_count: int = 2

    def __post_init__(self) -> None:
        if self.session_length <= 0:
            raise ValueError("session_length must be > 0")
        if self.tick_hz < 1:
            raise ValueError("tick_hz must be >= 1")
        for name in ("passive_point_interval", "speed_increase_interval",
                     "spawn_min_gap", "spawn_max_gap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.spawn_min_gap > self.spawn_max_gap:
            raise ValueError("spawn_min_gap must be <= spawn_max_gap")
        if not (0 < self.band_near_s < self.band_mid_s):
            raise ValueError("band thresholds must satisfy 0 < near < mid")
        if self.base_speed <= 0 or self.min_speed <= 0:
            raise ValueError("speeds must be > 0")
        if len(self.object_weights) != 3 or any(w < 0 for w in self.object_weights):
            raise ValueError("object_weights must be 3 non-negative values")
        if sum(self.object_weights) <= 0:
            raise ValueError("object_weights must not all be zero")
        if self.lane_count != 2:
            raise ValueError("lane_count is fixed at 2")

    @property
    def tick_dt(self) -> float:
        return 1.0 / self.tick_hz

    @property
    def session_ticks(self) -> int:
        return int(round(self.session_length * self.tick_hz))


class SpawnEvent(NamedTuple):
    spawn_time: float
    lane: int
    kind: ObjectKind
    # +/- speed change carried by potions; 0 for other kinds.
    potion_delta: float = 0.0


@dataclass(frozen=True)
class SpawnSchedule:
    """The fixed sequence of objects a session will spawn."""

    events: tuple[SpawnEvent, ...]

    def __post_init__(self) -> None:
        times = [e.spawn_time for e in self.events]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("spawn events must be sorted by spawn_time")

    @property
    def coin_count(self) -> int:
        return sum(1 for e in self.events if e.kind is ObjectKind.COIN)


class ActiveObject(NamedTuple):
    kind: ObjectKind
    lane: int
    distance: float
    potion_delta: float


class CellKey(NamedTuple):
    """8-parameter discretized state: player lane one-hot plus the content
    of three distance bands on each lane (0 empty, 1 item, 2 obstacle)."""

    lane_top: int
    lane_bottom: int
    top_near: int
    top_mid: int
    top_far: int
    bottom_near: int
    bottom_mid: int
    bottom_far: int

    def to_digits(self) -> str:
        return "".join(str(v) for v in self)

    @classmethod
    def from_digits(cls, digits: str) -> "CellKey":
        if len(digits) != 8 or not digits.isdigit():
            raise ValueError(f"bad cell key string: {digits!r}")
        return cls(*(int(c) for c in digits))


# 2 lanes x 3^6 band combinations
CELL_KEY_SPACE = 2 * 3 ** 6


@dataclass(frozen=True)
class GameState:
    tick: int
    time: float
    player_lane: int
    speed: float
    score: int
    active_objects: tuple[ActiveObject, ...]
    next_spawn_index: int
    passive_point_accumulator: float
    speed_timer: float


@dataclass(frozen=True)
class Snapshot:
    """Opaque save of a game state (schedule cursor included in the state)."""

    state: GameState


class StepEvents(NamedTuple):
    """What happened during one tick, for callers that need more than the
    successor state (tests, synthetic-trace generation)."""

    collision: bool
    coins: int
    potions: int
    attacked: int
    obstacles_passed: int


def snapshot(state: GameState) -> Snapshot:
    return Snapshot(state)


def restore(snap: Snapshot) -> GameState:
    return snap.state


def build_schedule(config: EnvConfig, seed: int) -> SpawnSchedule:
    """Generate the deterministic spawn schedule for a session.

    Gaps between events are uniform in [spawn_min_gap, spawn_max_gap], the
    lane is uniform, and the kind follows config.object_weights. Potions are
    assigned a +/- speed delta with equal probability.
    """
    rng = random.Random(seed)
    kinds = (ObjectKind.COIN, ObjectKind.POTION, ObjectKind.OBSTACLE)
    weights = config.object_weights
    events = []
    t = 0.0
    while True:
        t += rng.uniform(config.spawn_min_gap, config.spawn_max_gap)
        if t > config.session_length:
            break
        lane = TOP if rng.random() < 0.5 else BOTTOM
        kind = rng.choices(kinds, weights=weights)[0]
        delta = 0.0
        if kind is ObjectKind.POTION:
            delta = config.potion_speed_delta if rng.random() < 0.5 else -config.potion_speed_delta
        events.append(SpawnEvent(t, lane, kind, delta))
    return SpawnSchedule(tuple(events))


def write_schedule_csv(schedule: SpawnSchedule, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["spawn_time", "lane", "kind"])
        for ev in schedule.events:
            writer.writerow([repr(ev.spawn_time), LANE_NAMES[ev.lane], ev.kind.value])


class EndlessRunner:
    """Simulation of one deterministic session (config + schedule).

    All methods are pure with respect to the passed-in state; the instance
    only holds the immutable config and schedule, so one environment can be
    shared freely across replays.
    """

    def __init__(self, config: EnvConfig, schedule: SpawnSchedule):
        self.config = config
        self.schedule = schedule
        self._dt = config.tick_dt
        self._session_ticks = config.session_ticks

    @property
    def session_ticks(self) -> int:
        return self._session_ticks

    def new_game(self) -> GameState:
        return GameState(
            tick=0,
            time=0.0,
            player_lane=BOTTOM,
            speed=self.config.base_speed,
            score=0,
            active_objects=(),
            next_spawn_index=0,
            passive_point_accumulator=0.0,
            speed_timer=0.0,
        )

    def finished(self, state: GameState) -> bool:
        return state.tick >= self._session_ticks

    def step(self, state: GameState, action: Action) -> GameState:
        return self.step_detailed(state, action)[0]

    def step_detailed(self, state: GameState, action: Action) -> tuple[GameState, StepEvents]:
        """Advance one tick.

        Order within a tick: lane change and attack (using pre-movement
        distances), object movement, contact resolution, spawns, passive
        points, speed increments. An obstacle collision costs
        ``obstacle_penalty`` points, clears every on-screen object and resets
        the speed to ``base_speed``.
        """
        if state.tick >= self._session_ticks:
            raise SessionOver(
                f"session ended at tick {self._session_ticks}; cannot step further")
        cfg = self.config

        lane = _LANE_CHANGES.get(action, state.player_lane)
        speed = state.speed
        active: Sequence[ActiveObject] = state.active_objects

        attacked = 0
        if action in _ATTACK_ACTIONS:
            reach = speed * cfg.attack_range_s
            best_i = -1
            best_d = math.inf
            for i, obj in enumerate(active):
                if (obj.lane == lane and obj.kind is ObjectKind.OBSTACLE
                        and obj.distance <= reach and obj.distance < best_d):
                    best_i = i
                    best_d = obj.distance
            if best_i >= 0:
                active = active[:best_i] + active[best_i + 1:]
                attacked = 1

        tick = state.tick + 1
        time = tick * self._dt
        score = state.score

        travel = speed * self._dt
        moved = []
        reached = []
        for obj in active:
            nd = obj.distance - travel
            if nd <= 0.0:
                reached.append((nd, obj))
            else:
                moved.append(ActiveObject(obj.kind, obj.lane, nd, obj.potion_delta))

        collision = False
        coins = 0
        potions = 0
        passed = 0
        if reached:
            # Most negative distance crossed the player first; stable sort
            # keeps spawn order for exact ties.
            reached.sort(key=lambda pair: pair[0])
            for _, obj in reached:
                if obj.lane != lane:
                    if obj.kind is ObjectKind.OBSTACLE:
                        passed += 1
                    continue
                if obj.kind is ObjectKind.COIN:
                    score += cfg.coin_value
                    coins += 1
                elif obj.kind is ObjectKind.POTION:
                    speed = max(cfg.min_speed, speed + obj.potion_delta)
                    potions += 1
                else:
                    score -= cfg.obstacle_penalty
                    speed = cfg.base_speed
                    collision = True
                    break

        new_active = [] if collision else moved

        idx = state.next_spawn_index
        events = self.schedule.events
        n_events = len(events)
        while idx < n_events and events[idx].spawn_time <= time:
            ev = events[idx]
            new_active.append(
                ActiveObject(ev.kind, ev.lane, speed * cfg.spawn_horizon_s, ev.potion_delta))
            idx += 1

        acc = state.passive_point_accumulator + self._dt
        while acc >= cfg.passive_point_interval:
            score += 1
            acc -= cfg.passive_point_interval

        st = state.speed_timer + self._dt
        while st >= cfg.speed_increase_interval:
            speed += cfg.speed_increment
            st -= cfg.speed_increase_interval

        new_state = GameState(tick, time, lane, speed, score, tuple(new_active), idx, acc, st)
        return new_state, StepEvents(collision, coins, potions, attacked, passed)

    def featurize(self, state: GameState) -> CellKey:
        """Map a state onto its archive cell key.

        Objects at exactly a band threshold belong to the nearer band; a band
        holding both items and obstacles reads as obstacle.
        """
        cfg = self.config
        near_d = state.speed * cfg.band_near_s
        mid_d = state.speed * cfg.band_mid_s
        bands = [0, 0, 0, 0, 0, 0]
        for obj in state.active_objects:
            if obj.distance <= near_d:
                band = 0
            elif obj.distance <= mid_d:
                band = 1
            else:
                band = 2
            slot = band if obj.lane == TOP else band + 3
            value = BAND_OBSTACLE if obj.kind is ObjectKind.OBSTACLE else BAND_ITEM
            if value > bands[slot]:
                bands[slot] = value
        lane_top = 1 if state.player_lane == TOP else 0
        return CellKey(lane_top, 1 - lane_top, *bands)

    def optimal_score(self) -> int:
        """Best achievable score: every passive point plus every coin."""
        cfg = self.config
        passive = math.floor(cfg.session_length / cfg.passive_point_interval)
        return passive + cfg.coin_value * self.schedule.coin_count


def action_from_code(code: str) -> Action:
    try:
        return _CODE_TO_ACTION[code]
    except KeyError:
        raise ValueError(f"unknown action code: {code!r}") from None


def action_from_name(name: str) -> Action:
    try:
        return _NAME_TO_ACTION[name]
    except KeyError:
        raise ValueError(f"unknown action name: {name!r}") from None
