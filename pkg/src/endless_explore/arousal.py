"""Human arousal traces: loading, windowed averaging, and nearest-state lookup.

Annotated play sessions pair each timestamp with the discretized game state
(a :class:`~endless_explore.env.CellKey`), the score, and a raw arousal
value. Raw arousal is normalized per session to [0, 1] on load. The agent's
arousal in a state is estimated by finding the human sample whose state key
is closest (Hamming distance over the 8 key parameters).
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .env import CellKey

PLAYTRACE_COLUMNS = (
    "session_id", "timestamp_s", "lane_top", "lane_bottom",
    "b1", "b2", "b3", "b4", "b5", "b6", "score", "arousal_raw",
)


@dataclass(frozen=True)
class ArousalSample:
    timestamp: float
    key: CellKey
    score: float
    arousal: float


@dataclass(frozen=True)
class HumanSession:
    """One annotated playtrace. ``samples`` are strictly increasing in time
    and carry arousal already normalized to [0, 1]."""

    session_id: str
    samples: tuple[ArousalSample, ...]

    def __post_init__(self) -> None:
        if not self.samples:
            raise ValueError(f"session {self.session_id!r} has no samples")
        ts = [s.timestamp for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError(
                f"session {self.session_id!r}: timestamps must be strictly increasing")
        for s in self.samples:
            if not (0.0 <= s.arousal <= 1.0):
                raise ValueError(
                    f"session {self.session_id!r}: arousal {s.arousal} outside [0, 1]")


@dataclass(frozen=True)
class ArousalTrace:
    """Per-window target arousal values (the consensus trace)."""

    window_length: float
    values: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ArousalEstimate:
    value: float
    source_session: str
    source_timestamp: float
    distance: int


def window_index(timestamp: float, window_length: float) -> int:
    """Window that a sample belongs to.

    A sample landing exactly on a boundary belongs to the window it
    completes, so timestamps in (i*w, (i+1)*w] map to window i. This keeps
    sample windows aligned with agent-side estimates, which are taken at the
    tick that completes each window.
    """
    if timestamp <= 0.0:
        return 0
    return max(0, math.ceil(timestamp / window_length - 1e-9) - 1)


def completed_windows(time: float, window_length: float) -> int:
    """Number of whole windows finished by ``time``."""
    return int(math.floor(time / window_length + 1e-9))


def normalize_arousal(raw_values: Sequence[float]) -> list[float]:
    """Per-session min-max normalization to [0, 1]; constant traces map to 0.5."""
    lo = min(raw_values)
    hi = max(raw_values)
    if hi > lo:
        span = hi - lo
        return [(v - lo) / span for v in raw_values]
    return [0.5] * len(raw_values)


def session_from_raw(session_id: str,
                     rows: Sequence[tuple[float, CellKey, float, float]]) -> HumanSession:
    """Build a session from (timestamp, key, score, raw_arousal) rows,
    applying the per-session normalization."""
    normalized = normalize_arousal([r[3] for r in rows])
    samples = tuple(
        ArousalSample(ts, key, score, arousal)
        for (ts, key, score, _), arousal in zip(rows, normalized)
    )
    return HumanSession(session_id, samples)


def load_sessions(path: str) -> list[HumanSession]:
    """Read playtraces from a CSV file (see :data:`PLAYTRACE_COLUMNS`).

    Rows are grouped by session_id in order of first appearance; arousal is
    min-max normalized per session. Malformed rows raise ValueError naming
    the offending line.
    """
    by_id: dict[str, list[tuple[float, CellKey, float, float]]] = {}
    order: list[str] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != PLAYTRACE_COLUMNS:
            raise ValueError(
                f"{path}: line 1: expected header {','.join(PLAYTRACE_COLUMNS)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(PLAYTRACE_COLUMNS):
                raise ValueError(
                    f"{path}: line {lineno}: expected {len(PLAYTRACE_COLUMNS)} fields, "
                    f"got {len(row)}")
            try:
                sid = row[0]
                ts = float(row[1])
                key_fields = [int(v) for v in row[2:10]]
                score = float(row[10])
                raw = float(row[11])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: malformed row {row!r}") from None
            if key_fields[0] + key_fields[1] != 1 or any(v not in (0, 1) for v in key_fields[:2]):
                raise ValueError(f"{path}: line {lineno}: lane bits must be one-hot")
            if any(v not in (0, 1, 2) for v in key_fields[2:]):
                raise ValueError(f"{path}: line {lineno}: band slots must be 0, 1 or 2")
            key = CellKey(*key_fields)
            if sid not in by_id:
                by_id[sid] = []
                order.append(sid)
            rows = by_id[sid]
            if rows and ts <= rows[-1][0]:
                raise ValueError(
                    f"{path}: line {lineno}: timestamp {ts} not increasing within "
                    f"session {sid!r}")
            rows.append((ts, key, score, raw))
    if not order:
        raise ValueError(f"{path}: no data rows")
    return [session_from_raw(sid, by_id[sid]) for sid in order]


def write_sessions_csv(path: str, sessions_raw: Iterable[tuple[str, list[tuple[float, CellKey, float, float]]]]) -> None:
    """Write (session_id, [(timestamp, key, score, raw_arousal), ...]) groups
    in the playtrace format."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(PLAYTRACE_COLUMNS)
        for sid, rows in sessions_raw:
            for ts, key, score, raw in rows:
                writer.writerow([sid, repr(ts), *key, repr(score), repr(raw)])


def from_again_export(path: str) -> list[HumanSession]:
    """Converter stub for the AGAIN dataset's Endless Runner exports.

    AGAIN publishes per-session logs with timestamped game telemetry and a
    continuous arousal annotation channel. Mapping onto the playtrace format:

    - ``session_id``: the AGAIN participant/session identifier.
    - ``timestamp_s``: seconds since session start (resample to one row per
      window if the annotation rate is higher).
    - ``lane_top``/``lane_bottom``: one-hot of the avatar's lane.
    - ``b1..b6``: discretize the on-screen objects with
      :meth:`~endless_explore.env.EndlessRunner.featurize` semantics
      (top/bottom x near/mid/far; 0 empty, 1 item, 2 obstacle).
    - ``score``: the running game score.
    - ``arousal_raw``: the unbounded annotation value; normalization happens
      on load.
    """
    raise NotImplementedError("AGAIN exports are not bundled; see docstring for the mapping")


def mean_arousal_trace(sessions: Sequence[HumanSession], window_length: float = 1.0,
                       session_length: float | None = None) -> ArousalTrace:
    """Average all sessions' arousal per time window.

    A window's value is the mean over sessions of each session's mean arousal
    inside that window; sessions without samples in a window are excluded
    from that window's mean. The trace covers every complete window of the
    session (``floor(session_length / window_length)`` of them when
    session_length is given, otherwise up to the last sampled window), and a
    window covered by no session at all is an error.
    """
    if not sessions:
        raise ValueError("need at least one session")
    if window_length <= 0:
        raise ValueError("window_length must be > 0")
    if session_length is not None:
        n_windows = int(math.floor(session_length / window_length + 1e-9))
    else:
        n_windows = 1 + max(
            window_index(s.samples[-1].timestamp, window_length) for s in sessions)
    sums = [0.0] * n_windows
    counts = [0] * n_windows
    for session in sessions:
        w_sum = [0.0] * n_windows
        w_count = [0] * n_windows
        for sample in session.samples:
            w = window_index(sample.timestamp, window_length)
            if w >= n_windows:
                continue
            w_sum[w] += sample.arousal
            w_count[w] += 1
        for w in range(n_windows):
            if w_count[w]:
                sums[w] += w_sum[w] / w_count[w]
                counts[w] += 1
    values = []
    for w in range(n_windows):
        if not counts[w]:
            raise ValueError(f"no session has samples in window {w}")
        values.append(sums[w] / counts[w])
    return ArousalTrace(window_length, tuple(values))


def target_arousal(trace: ArousalTrace, i: int) -> float:
    if not 0 <= i < len(trace.values):
        raise IndexError(f"window {i} out of range for trace of length {len(trace.values)}")
    return trace.values[i]


def session_window_means(session: HumanSession, window_length: float,
                         n_windows: int) -> list[float | None]:
    """Per-window mean arousal for one session; None where it has no samples."""
    sums = [0.0] * n_windows
    counts = [0] * n_windows
    for sample in session.samples:
        w = window_index(sample.timestamp, window_length)
        if w >= n_windows:
            continue
        sums[w] += sample.arousal
        counts[w] += 1
    return [sums[w] / counts[w] if counts[w] else None for w in range(n_windows)]


def hamming(a: CellKey, b: CellKey) -> int:
    d = 0
    for x, y in zip(a, b):
        if x != y:
            d += 1
    return d


def subset_sessions(sessions: Sequence[HumanSession], seed: int,
                    size: int = 16) -> tuple[HumanSession, ...]:
    """Uniform sample without replacement, deterministic in the seed."""
    if size >= len(sessions):
        return tuple(sessions)
    rng = random.Random(seed)
    return tuple(rng.sample(list(sessions), size))


class NearestArousalLookup:
    """Nearest-state arousal queries against a fixed set of sessions.

    Samples are grouped by cell key, keeping per key the sample with the
    earliest timestamp (session_id breaking exact ties), which is the
    canonical winner among equidistant samples. Queries then scan distinct
    keys only; results are memoized, which is safe because the session set
    is immutable.
    """

    def __init__(self, sessions: Sequence[HumanSession]):
        if not sessions:
            raise ValueError("need at least one session for arousal lookup")
        self.sessions = tuple(sessions)
        best_per_key: dict[CellKey, tuple[float, str, float]] = {}
        for session in self.sessions:
            sid = session.session_id
            for sample in session.samples:
                entry = (sample.timestamp, sid, sample.arousal)
                cur = best_per_key.get(sample.key)
                if cur is None or entry[:2] < cur[:2]:
                    best_per_key[sample.key] = entry
        self._entries = [(key, ts, sid, arousal)
                         for key, (ts, sid, arousal) in best_per_key.items()]
        self._by_key = best_per_key
        self._memo: dict[CellKey, ArousalEstimate] = {}

    def estimate(self, key: CellKey) -> ArousalEstimate:
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        exact = self._by_key.get(key)
        if exact is not None:
            ts, sid, arousal = exact
            est = ArousalEstimate(arousal, sid, ts, 0)
        else:
            best = None
            for entry_key, ts, sid, arousal in self._entries:
                d = 0
                for x, y in zip(key, entry_key):
                    if x != y:
                        d += 1
                cand = (d, ts, sid, arousal)
                if best is None or cand[:3] < best[:3]:
                    best = cand
            est = ArousalEstimate(best[3], best[2], best[1], best[0])
        self._memo[key] = est
        return est


@lru_cache(maxsize=8)
def _cached_lookup(sessions: tuple[HumanSession, ...], subset_seed: int,
                   subset_size: int) -> NearestArousalLookup:
    return NearestArousalLookup(subset_sessions(sessions, subset_seed, subset_size))


def estimate_agent_arousal(state_key: CellKey, sessions: Sequence[HumanSession],
                           subset_seed: int, subset_size: int = 16) -> ArousalEstimate:
    """Arousal of the human sample whose state key is nearest to ``state_key``.

    The search runs over a seeded subset of sessions; ties on distance go to
    the earlier timestamp, then the lexicographically smaller session_id.
    """
    if not sessions:
        raise ValueError("empty session set")
    lookup = _cached_lookup(tuple(sessions), subset_seed, subset_size)
    return lookup.estimate(state_key)


def arousal_reward(h_history: Sequence[float], a_history: Sequence[float]) -> float:
    """Mean closeness between estimated and target arousal over the windows
    observed so far: (1/n) * sum(1 - |h(i) - a(i)|), in [0, 1].

    Terms are summed left to right so that incremental accumulation during a
    rollout reproduces this value bit for bit.
    """
    n = len(h_history)
    if n == 0:
        raise ValueError("histories must be non-empty")
    if n != len(a_history):
        raise ValueError(f"history length mismatch: {n} vs {len(a_history)}")
    total = 0.0
    for h, a in zip(h_history, a_history):
        if not (0.0 <= h <= 1.0 and 0.0 <= a <= 1.0):
            raise ValueError("arousal values must be within [0, 1]")
        total += 1.0 - abs(h - a)
    return total / n
