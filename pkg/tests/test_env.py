import random

import pytest

from endless_explore.env import (
    ACTIONS,
    BOTTOM,
    TOP,
    Action,
    ActiveObject,
    CellKey,
    EndlessRunner,
    EnvConfig,
    GameState,
    ObjectKind,
    SessionOver,
    SpawnEvent,
    SpawnSchedule,
    build_schedule,
    restore,
    snapshot,
    write_schedule_csv,
)


def make_state(env, *, lane=BOTTOM, speed=None, score=0, objects=(), tick=0):
    cfg = env.config
    return GameState(
        tick=tick,
        time=tick * cfg.tick_dt,
        player_lane=lane,
        speed=cfg.base_speed if speed is None else speed,
        score=score,
        active_objects=tuple(objects),
        next_spawn_index=len(env.schedule.events),
        passive_point_accumulator=0.0,
        speed_timer=0.0,
    )


def empty_env(config=None):
    return EndlessRunner(config or EnvConfig(), SpawnSchedule(()))


def obstacle(lane, distance):
    return ActiveObject(ObjectKind.OBSTACLE, lane, distance, 0.0)


def coin(lane, distance):
    return ActiveObject(ObjectKind.COIN, lane, distance, 0.0)


def potion(lane, distance, delta):
    return ActiveObject(ObjectKind.POTION, lane, distance, delta)


class TestEnvConfig:
    def test_defaults_valid(self):
        cfg = EnvConfig()
        assert cfg.session_ticks == 480
        assert cfg.tick_dt == 0.25

    @pytest.mark.parametrize("kwargs", [
        {"session_length": 0.0},
        {"tick_hz": 0},
        {"passive_point_interval": 0.0},
        {"band_near_s": 2.5, "band_mid_s": 2.5},
        {"spawn_min_gap": 2.0, "spawn_max_gap": 1.0},
        {"lane_count": 3},
        {"object_weights": (0.0, 0.0, 0.0)},
    ])
    def test_invalid_configs_rejected(self, kwargs):
        with pytest.raises(ValueError):
            EnvConfig(**kwargs)


class TestBuildSchedule:
    def test_same_seed_same_schedule(self, default_config):
        assert build_schedule(default_config, 7) == build_schedule(default_config, 7)

    def test_forced_gap_yields_one_event_per_second(self):
        cfg = EnvConfig(session_length=10.0, spawn_min_gap=1.0, spawn_max_gap=1.0)
        schedule = build_schedule(cfg, 3)
        assert [e.spawn_time for e in schedule.events] == [float(t) for t in range(1, 11)]

    def test_different_seeds_differ(self, default_config):
        a = build_schedule(default_config, 7)
        b = build_schedule(default_config, 8)
        assert a.events != b.events

    def test_gaps_within_bounds(self, default_config):
        for seed in range(20):
            schedule = build_schedule(default_config, seed)
            times = [e.spawn_time for e in schedule.events]
            assert all(0.0 <= t <= default_config.session_length for t in times)
            gaps = [b - a for a, b in zip(times, times[1:])]
            lo, hi = default_config.spawn_min_gap, default_config.spawn_max_gap
            assert all(lo - 1e-9 <= g <= hi + 1e-9 for g in gaps)

    def test_potions_carry_speed_delta(self, default_config):
        schedule = build_schedule(default_config, 12)
        potions = [e for e in schedule.events if e.kind is ObjectKind.POTION]
        assert potions, "seed 12 should spawn at least one potion"
        delta = default_config.potion_speed_delta
        assert all(abs(e.potion_delta) == delta for e in potions)
        others = [e for e in schedule.events if e.kind is not ObjectKind.POTION]
        assert all(e.potion_delta == 0.0 for e in others)

    def test_unsorted_events_rejected(self):
        with pytest.raises(ValueError):
            SpawnSchedule((SpawnEvent(2.0, TOP, ObjectKind.COIN),
                           SpawnEvent(1.0, TOP, ObjectKind.COIN)))

    def test_csv_export(self, tmp_path, default_config):
        schedule = build_schedule(default_config, 5)
        path = tmp_path / "schedule.csv"
        write_schedule_csv(schedule, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "spawn_time,lane,kind"
        assert len(lines) == 1 + len(schedule.events)
        first = lines[1].split(",")
        assert first[1] in ("top", "bottom")
        assert first[2] in ("coin", "potion", "obstacle")


class TestNewGame:
    def test_initial_state(self, default_config):
        env = EndlessRunner(default_config, build_schedule(default_config, 1))
        state = env.new_game()
        assert state.score == 0
        assert state.time == 0.0
        assert state.tick == 0
        assert state.speed == default_config.base_speed
        assert state.player_lane == BOTTOM
        assert state.active_objects == ()

    def test_initial_key_all_empty(self, default_config):
        env = EndlessRunner(default_config, build_schedule(default_config, 1))
        assert env.featurize(env.new_game()) == CellKey(0, 1, 0, 0, 0, 0, 0, 0)

    def test_new_game_deterministic(self, default_config):
        env = EndlessRunner(default_config, build_schedule(default_config, 1))
        assert env.new_game() == env.new_game()


class TestStep:
    def test_obstacle_collision(self):
        env = empty_env()
        state = make_state(env, objects=[obstacle(BOTTOM, 1.0), coin(TOP, 50.0)])
        nxt, events = env.step_detailed(state, Action.NOOP)
        assert nxt.score == -env.config.obstacle_penalty
        assert nxt.speed == env.config.base_speed
        assert nxt.active_objects == ()
        assert events.collision

    def test_passive_point_every_three_seconds(self):
        env = empty_env()
        state = env.new_game()
        for _ in range(12):
            state = env.step(state, Action.NOOP)
        assert state.score == 1
        assert state.time == 3.0

    def test_noop_mid_interval_only_advances_time(self):
        env = empty_env()
        state = env.new_game()
        nxt = env.step(state, Action.NOOP)
        assert nxt.score == 0
        assert nxt.time == state.time + env.config.tick_dt

    def test_coin_pickup(self):
        env = empty_env()
        state = make_state(env, objects=[coin(BOTTOM, 1.0)])
        nxt, events = env.step_detailed(state, Action.NOOP)
        assert nxt.score == env.config.coin_value
        assert events.coins == 1
        assert nxt.active_objects == ()

    def test_potion_changes_speed_only(self):
        env = empty_env()
        delta = env.config.potion_speed_delta
        state = make_state(env, objects=[potion(BOTTOM, 1.0, delta)])
        nxt, events = env.step_detailed(state, Action.NOOP)
        assert nxt.speed == env.config.base_speed + delta
        assert nxt.score == 0
        assert events.potions == 1

    def test_potion_respects_min_speed(self):
        env = empty_env()
        slow = env.config.min_speed + 0.5
        state = make_state(env, speed=slow,
                           objects=[potion(BOTTOM, slow * env.config.tick_dt * 0.5,
                                           -env.config.potion_speed_delta)])
        nxt = env.step(state, Action.NOOP)
        assert nxt.speed == env.config.min_speed

    def test_off_lane_object_passes_without_effect(self):
        env = empty_env()
        state = make_state(env, objects=[obstacle(TOP, 1.0)])
        nxt, events = env.step_detailed(state, Action.NOOP)
        assert nxt.score == 0
        assert nxt.active_objects == ()
        assert not events.collision
        assert events.obstacles_passed == 1

    def test_lane_change(self):
        env = empty_env()
        state = env.new_game()
        up = env.step(state, Action.UP)
        assert up.player_lane == TOP
        down = env.step(up, Action.DOWN)
        assert down.player_lane == BOTTOM

    def test_attack_removes_nearest_obstacle_in_range(self):
        env = empty_env()
        reach = env.config.base_speed * env.config.attack_range_s
        near = obstacle(BOTTOM, reach * 0.5)
        farther = obstacle(BOTTOM, reach * 0.9)
        state = make_state(env, objects=[farther, near])
        nxt, events = env.step_detailed(state, Action.ATTACK)
        assert events.attacked == 1
        kept = [o for o in nxt.active_objects if o.kind is ObjectKind.OBSTACLE]
        assert len(kept) == 1
        # The nearer obstacle died; the farther one only moved closer.
        assert kept[0].distance == pytest.approx(
            farther.distance - env.config.base_speed * env.config.tick_dt)

    def test_attack_out_of_range_is_noop(self):
        env = empty_env()
        reach = env.config.base_speed * env.config.attack_range_s
        state = make_state(env, objects=[obstacle(BOTTOM, reach * 3)])
        nxt, events = env.step_detailed(state, Action.ATTACK)
        assert events.attacked == 0
        assert len(nxt.active_objects) == 1

    def test_attack_applies_before_movement_at_exact_reach(self):
        env = empty_env()
        reach = env.config.base_speed * env.config.attack_range_s
        state = make_state(env, objects=[obstacle(BOTTOM, reach)])
        _, events = env.step_detailed(state, Action.ATTACK)
        assert events.attacked == 1

    def test_up_attack_attacks_on_new_lane(self):
        env = empty_env()
        reach = env.config.base_speed * env.config.attack_range_s
        state = make_state(env, lane=BOTTOM, objects=[obstacle(TOP, reach * 0.5)])
        nxt, events = env.step_detailed(state, Action.UP_ATTACK)
        assert nxt.player_lane == TOP
        assert events.attacked == 1

    def test_speed_increment_every_ten_seconds(self):
        env = empty_env()
        state = env.new_game()
        for _ in range(40):
            state = env.step(state, Action.NOOP)
        assert state.time == 10.0
        assert state.speed == env.config.base_speed + env.config.speed_increment

    def test_spawns_appear_at_horizon(self, default_config):
        schedule = SpawnSchedule((SpawnEvent(0.2, TOP, ObjectKind.COIN),))
        env = EndlessRunner(default_config, schedule)
        state = env.step(env.new_game(), Action.NOOP)
        assert len(state.active_objects) == 1
        obj = state.active_objects[0]
        assert obj.distance == default_config.base_speed * default_config.spawn_horizon_s
        assert state.next_spawn_index == 1

    def test_step_finished_game_rejected(self):
        cfg = EnvConfig(session_length=1.0)
        env = empty_env(cfg)
        state = env.new_game()
        for _ in range(cfg.session_ticks):
            state = env.step(state, Action.NOOP)
        assert env.finished(state)
        with pytest.raises(SessionOver):
            env.step(state, Action.NOOP)

    def test_collision_breaks_before_trailing_reached_objects(self):
        # A coin right behind an obstacle on the same lane dies in the crash.
        env = empty_env()
        state = make_state(env, objects=[obstacle(BOTTOM, 0.5), coin(BOTTOM, 1.0)])
        nxt, events = env.step_detailed(state, Action.NOOP)
        assert events.collision
        assert events.coins == 0
        assert nxt.score == -env.config.obstacle_penalty


class TestSnapshotRestore:
    def test_round_trip_identity(self, default_config):
        env = EndlessRunner(default_config, build_schedule(default_config, 2))
        state = env.new_game()
        for _ in range(17):
            state = env.step(state, Action.NOOP)
        assert restore(snapshot(state)) == state

    def test_replay_from_snapshot_matches(self, default_config):
        env = EndlessRunner(default_config, build_schedule(default_config, 3))
        rng = random.Random(0)
        state = env.new_game()
        for _ in range(240):
            state = env.step(state, ACTIONS[rng.randrange(6)])
        snap = snapshot(state)
        suffix = [ACTIONS[rng.randrange(6)] for _ in range(10)]
        first = restore(snap)
        second = restore(snap)
        for action in suffix:
            first = env.step(first, action)
            second = env.step(second, action)
        assert first == second

    def test_hundred_random_replays_match(self, default_config):
        master = random.Random(123)
        for _ in range(100):
            seed = master.randrange(10 ** 6)
            env = EndlessRunner(default_config, build_schedule(default_config, seed))
            rng = random.Random(seed + 1)
            state = env.new_game()
            prefix_len = rng.randrange(0, 400)
            for _ in range(prefix_len):
                state = env.step(state, ACTIONS[rng.randrange(6)])
            snap = snapshot(state)
            suffix = [ACTIONS[rng.randrange(6)] for _ in range(20)]
            replayed = restore(snap)
            original = state
            for action in suffix:
                if env.finished(original):
                    break
                original = env.step(original, action)
                replayed = env.step(replayed, action)
            assert original.score == replayed.score
            assert env.featurize(original) == env.featurize(replayed)
            assert original == replayed


class TestFeaturize:
    def test_empty_field_bottom_lane(self):
        env = empty_env()
        key = env.featurize(make_state(env))
        assert key == CellKey(0, 1, 0, 0, 0, 0, 0, 0)

    def test_lane_one_hot(self):
        env = empty_env()
        key = env.featurize(make_state(env, lane=TOP))
        assert (key.lane_top, key.lane_bottom) == (1, 0)

    def test_obstacle_beats_item_in_same_band(self):
        env = empty_env()
        near = env.config.base_speed * env.config.band_near_s
        state = make_state(env, objects=[coin(TOP, near * 0.5), obstacle(TOP, near * 0.6)])
        key = env.featurize(state)
        assert key.top_near == 2

    def test_boundary_object_in_nearer_band(self):
        env = empty_env()
        near = env.config.base_speed * env.config.band_near_s
        mid = env.config.base_speed * env.config.band_mid_s
        state = make_state(env, objects=[coin(TOP, near), coin(BOTTOM, mid)])
        key = env.featurize(state)
        assert key.top_near == 1
        assert key.top_mid == 0
        assert key.bottom_mid == 1
        assert key.bottom_far == 0

    def test_band_thresholds_scale_with_speed(self):
        env = empty_env()
        cfg = env.config
        distance = cfg.base_speed * cfg.band_mid_s * 1.2  # far at base speed
        state = make_state(env, objects=[coin(TOP, distance)])
        assert env.featurize(state).top_far == 1
        faster = make_state(env, speed=cfg.base_speed * 2, objects=[coin(TOP, distance)])
        assert env.featurize(faster).top_mid == 1

    def test_key_digits_round_trip(self):
        key = CellKey(1, 0, 0, 1, 2, 0, 2, 1)
        assert CellKey.from_digits(key.to_digits()) == key

    def test_distinct_keys_bounded_over_run(self, default_config):
        env = EndlessRunner(default_config, build_schedule(default_config, 9))
        rng = random.Random(9)
        state = env.new_game()
        seen = {env.featurize(state)}
        while not env.finished(state):
            state = env.step(state, ACTIONS[rng.randrange(6)])
            seen.add(env.featurize(state))
        assert len(seen) <= 1458


class TestOptimalScore:
    def test_passive_component_only(self, default_config):
        env = EndlessRunner(default_config, SpawnSchedule(()))
        assert env.optimal_score() == 40

    def test_passive_plus_counted_coins(self, default_config):
        events = tuple(SpawnEvent(1.0 + i, i % 2, ObjectKind.COIN) for i in range(12))
        env = EndlessRunner(default_config, SpawnSchedule(events))
        assert env.optimal_score() == 52

    def test_generated_schedule_matches_formula(self, default_config):
        schedule = build_schedule(default_config, 4)
        env = EndlessRunner(default_config, schedule)
        coins = sum(1 for e in schedule.events if e.kind is ObjectKind.COIN)
        assert env.optimal_score() == 40 + default_config.coin_value * coins

    def test_degenerate_short_session(self):
        cfg = EnvConfig(session_length=1.0)
        env = EndlessRunner(cfg, SpawnSchedule(()))
        assert env.optimal_score() == 0


class TestInvariants:
    def test_tickwise_determinism(self, default_config):
        env = EndlessRunner(default_config, build_schedule(default_config, 21))
        rng = random.Random(21)
        actions = [ACTIONS[rng.randrange(6)] for _ in range(default_config.session_ticks)]
        runs = []
        for _ in range(2):
            state = env.new_game()
            trace = []
            for action in actions:
                state = env.step(state, action)
                trace.append((state.score, env.featurize(state)))
            runs.append(trace)
        assert runs[0] == runs[1]

    def test_score_accounting_exact(self, default_config):
        for seed in range(5):
            env = EndlessRunner(default_config, build_schedule(default_config, seed))
            rng = random.Random(seed * 7 + 1)
            state = env.new_game()
            coins = collisions = passive = 0
            while not env.finished(state):
                prev = state
                state, events = env.step_detailed(state, ACTIONS[rng.randrange(6)])
                coins += events.coins
                if events.collision:
                    collisions += 1
                gained = state.score - prev.score
                passive += (gained
                            - events.coins * default_config.coin_value
                            + (default_config.obstacle_penalty if events.collision else 0))
            assert passive == 40
            assert state.score == (passive
                                   + coins * default_config.coin_value
                                   - default_config.obstacle_penalty * collisions)

    def test_speed_changes_only_via_known_causes(self, default_config):
        env = EndlessRunner(default_config, build_schedule(default_config, 31))
        rng = random.Random(31)
        state = env.new_game()
        while not env.finished(state):
            prev = state
            state, events = env.step_detailed(state, ACTIONS[rng.randrange(6)])
            if events.collision:
                assert state.speed >= default_config.base_speed
            elif state.speed != prev.speed:
                speed_tick = prev.speed_timer + default_config.tick_dt \
                    >= default_config.speed_increase_interval
                assert events.potions > 0 or speed_tick
