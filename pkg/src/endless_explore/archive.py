"""Cell archive: the best-known trajectory per discretized game state.

Cells are keyed by :class:`~endless_explore.env.CellKey`. A stored cell is
replaced only by a candidate with a strictly higher blended reward, or an
equal reward reached by a strictly shorter trajectory, so the stored reward
per key never decreases over a run.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

from .env import Action, CellKey, Snapshot


@dataclass(frozen=True)
class Trajectory:
    """Actions from the initial state plus the per-window arousal histories
    observed along the way."""

    actions: tuple[Action, ...]
    end_tick: int
    h_history: tuple[float, ...]
    a_history: tuple[float, ...]
    raw_score: int

    def action_string(self) -> str:
        return "".join(a.value for a in self.actions)


@dataclass
class Cell:
    key: CellKey
    trajectory: Trajectory
    snapshot: Snapshot
    r_b: float
    r_a: float
    r_lambda: float
    visits: int = 1


class InsertOutcome(Enum):
    INSERTED = "inserted"
    UPDATED = "updated"
    REJECTED = "rejected"


def _rank(cell: Cell) -> tuple[float, float, int]:
    # Higher blended reward, then higher behavior reward, then shorter
    # trajectory; earlier insertion wins remaining ties via scan order.
    return (cell.r_lambda, cell.r_b, -len(cell.trajectory.actions))


class Archive:
    """Insertion-ordered map of cell key to best-known cell."""

    def __init__(self) -> None:
        self._cells: dict[CellKey, Cell] = {}
        self._keys: list[CellKey] = []
        self._insert_index: dict[CellKey, int] = {}
        # Stored r_lambda per key over time, for invariant auditing.
        self._reward_history: dict[CellKey, list[float]] = {}
        self._best: Cell | None = None

    def __len__(self) -> int:
        return len(self._cells)

    def __contains__(self, key: CellKey) -> bool:
        return key in self._cells

    def get(self, key: CellKey) -> Cell | None:
        return self._cells.get(key)

    def cells(self) -> Iterator[Cell]:
        for key in self._keys:
            yield self._cells[key]

    def reward_history(self, key: CellKey) -> tuple[float, ...]:
        return tuple(self._reward_history.get(key, ()))

    def insert_or_update(self, candidate: Cell) -> InsertOutcome:
        """Store the candidate if its key is new or it beats the stored cell.

        The visit count for the key is incremented on every call, whatever
        the outcome.
        """
        stored = self._cells.get(candidate.key)
        if stored is None:
            candidate.visits = 1
            self._cells[candidate.key] = candidate
            self._insert_index[candidate.key] = len(self._keys)
            self._keys.append(candidate.key)
            self._reward_history[candidate.key] = [candidate.r_lambda]
            self._track_best(candidate)
            return InsertOutcome.INSERTED
        stored.visits += 1
        better = candidate.r_lambda > stored.r_lambda or (
            candidate.r_lambda == stored.r_lambda
            and len(candidate.trajectory.actions) < len(stored.trajectory.actions))
        if not better:
            return InsertOutcome.REJECTED
        stored.trajectory = candidate.trajectory
        stored.snapshot = candidate.snapshot
        stored.r_b = candidate.r_b
        stored.r_a = candidate.r_a
        stored.r_lambda = candidate.r_lambda
        self._reward_history[candidate.key].append(candidate.r_lambda)
        self._track_best(stored)
        return InsertOutcome.UPDATED

    def _track_best(self, cell: Cell) -> None:
        if self._best is None or cell is self._best:
            self._best = cell if self._best is None else self._best
            return
        cand = (_rank(cell), -self._insert_index[cell.key])
        cur = (_rank(self._best), -self._insert_index[self._best.key])
        if cand > cur:
            self._best = cell

    def select_cell(self, rng: random.Random) -> Cell:
        """Uniform random choice over discovered cells; reward and visit
        counts play no part."""
        if not self._keys:
            raise ValueError("cannot select from an empty archive")
        key = self._keys[rng.randrange(len(self._keys))]
        return self._cells[key]

    def best_cell(self) -> Cell:
        """Cell maximizing r_lambda; ties fall to higher r_b, then shorter
        trajectory, then earlier insertion."""
        if not self._keys:
            raise ValueError("empty archive has no best cell")
        best = None
        best_rank = None
        for key in self._keys:
            cell = self._cells[key]
            rank = _rank(cell)
            if best is None or rank > best_rank:
                best = cell
                best_rank = rank
        return best

    @property
    def current_best(self) -> Cell:
        """Incrementally tracked equivalent of :meth:`best_cell`, for cheap
        per-iteration logging."""
        if self._best is None:
            raise ValueError("empty archive has no best cell")
        return self._best

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["key", "r_b", "r_a", "r_lambda", "visits", "trajectory_len", "actions"])
            for cell in self.cells():
                writer.writerow([
                    cell.key.to_digits(),
                    repr(cell.r_b),
                    repr(cell.r_a),
                    repr(cell.r_lambda),
                    cell.visits,
                    len(cell.trajectory.actions),
                    cell.trajectory.action_string(),
                ])


def write_trajectory(trajectory: Trajectory, path: str) -> None:
    """Save a replayable action list, one action name per line."""
    with open(path, "w") as fh:
        for action in trajectory.actions:
            fh.write(action.name + "\n")


def read_trajectory_actions(path: str) -> tuple[Action, ...]:
    from .env import action_from_name

    actions = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            name = line.strip()
            if not name:
                continue
            try:
                actions.append(action_from_name(name))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: unknown action {name!r}") from None
    return tuple(actions)
