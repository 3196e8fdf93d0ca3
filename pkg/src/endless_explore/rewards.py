"""Reward normalization and blending.

The behavior reward is the game score normalized against the best score the
session's schedule allows, clamped to [0, 1] (heavy collision runs can go
negative in raw points). The blended reward is the convex combination
``lam * r_a + (1 - lam) * r_b``.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RewardWeights:
    """Blend weight: 0 optimizes behavior only, 1 imitates arousal only."""

    lam: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must be within [0, 1], got {self.lam}")


@dataclass(frozen=True)
class RewardBundle:
    r_b: float
    r_a: float
    r_lambda: float


def behavior_reward(score: float, optimal: float) -> float:
    if optimal <= 0:
        raise ValueError(f"optimal score must be > 0, got {optimal}")
    value = score / optimal
    if value < 0.0:
        return 0.0
    if value > 1.0:
        return 1.0
    return value


def blended_reward(r_a: float, r_b: float, weights: RewardWeights) -> float:
    if not (0.0 <= r_a <= 1.0 and 0.0 <= r_b <= 1.0):
        raise ValueError(f"rewards must be within [0, 1], got r_a={r_a}, r_b={r_b}")
    return weights.lam * r_a + (1.0 - weights.lam) * r_b
