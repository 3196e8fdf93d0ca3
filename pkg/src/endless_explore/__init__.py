"""Archive-driven exploration of a deterministic endless runner, with a
reward that blends in-game score against imitation of human arousal traces."""

from .archive import Archive, Cell, InsertOutcome, Trajectory
from .arousal import (
    ArousalEstimate,
    ArousalTrace,
    HumanSession,
    NearestArousalLookup,
    arousal_reward,
    estimate_agent_arousal,
    load_sessions,
    mean_arousal_trace,
    target_arousal,
)
from .env import (
    Action,
    CellKey,
    EndlessRunner,
    EnvConfig,
    GameState,
    SessionOver,
    Snapshot,
    SpawnSchedule,
    build_schedule,
    restore,
    snapshot,
)
from .experiment import (
    ExperimentConfig,
    SummaryRow,
    confidence_interval,
    human_stats,
    random_baseline,
    run_sweep,
)
from .explore import ExploreParams, replay, rollout, run_exploration
from .rewards import RewardBundle, RewardWeights, behavior_reward, blended_reward
from .synthetic import generate_synthetic_sessions

__all__ = [
    "Action",
    "Archive",
    "ArousalEstimate",
    "ArousalTrace",
    "Cell",
    "CellKey",
    "EndlessRunner",
    "EnvConfig",
    "ExperimentConfig",
    "ExploreParams",
    "GameState",
    "HumanSession",
    "InsertOutcome",
    "NearestArousalLookup",
    "RewardBundle",
    "RewardWeights",
    "SessionOver",
    "Snapshot",
    "SpawnSchedule",
    "SummaryRow",
    "Trajectory",
    "arousal_reward",
    "behavior_reward",
    "blended_reward",
    "build_schedule",
    "confidence_interval",
    "estimate_agent_arousal",
    "generate_synthetic_sessions",
    "human_stats",
    "load_sessions",
    "mean_arousal_trace",
    "random_baseline",
    "replay",
    "restore",
    "rollout",
    "run_exploration",
    "run_sweep",
    "snapshot",
    "target_arousal",
]
