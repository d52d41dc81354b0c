"""Core domain state: simulation parameters, agents, opinions, weights.

The network is a fully connected directed graph over n agents. Arrays are
the primary representation:

  idea_states : (n, k) float64, agent idea vectors
  weights     : (n, n) float64, weights[i, j] = influence of author j on
                user i (the directed edge j -> i); diagonal fixed at 0

Each agent keeps a bounded FIFO window of its own recent opinions, stored
as a ring buffer so the rolling average is cheap to recompute.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .sampling import PowerLawSpec, RngStream, power_law_inverse_cdf

STRATEGIES = ("SC", "NO", "FO", "NU", "FU", "NOU")
WEIGHT_INITS = ("uniform", "power_law")

SNAPSHOT_FORMAT = "recosim-state-v1"


@dataclass(frozen=True)
class SimParams:
    """All knobs of a single simulation run.

    Defaults: a 100-agent network, 15-dimensional idea vectors, rounds of
    100 opinions up to 3,000 total, and 20-item recommendations.
    """

    n: int = 100
    k: int = 15
    c: float = 0.01               # conformity strength
    h: float = 0.3                # homophily strength
    a: float = 0.01               # attention-to-novelty strength
    theta_h: float = 0.1          # homophily distance threshold
    theta_a: float = 0.1          # novelty distance threshold
    opinion_noise: float = 0.1    # per-component noise when authoring an opinion
    state_noise: float = 0.01     # per-component noise in the idea-state update
    opinions_per_round: int = 100
    total_opinions: int = 3000
    recommendation_size: int = 20
    recent_window: int = 10
    weight_init: str = "uniform"
    strategy: str = "SC"
    normalize_distance: bool = True
    seed: int = 0

    def validate(self) -> None:
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.recommendation_size < 1:
            raise ValueError(
                f"recommendation_size must be >= 1, got {self.recommendation_size}"
            )
        if self.recent_window < 1:
            raise ValueError(f"recent_window must be >= 1, got {self.recent_window}")
        for name in ("c", "h", "a", "theta_h", "theta_a", "opinion_noise", "state_noise"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.opinions_per_round < 1:
            raise ValueError(
                f"opinions_per_round must be >= 1, got {self.opinions_per_round}"
            )
        if self.total_opinions % self.opinions_per_round != 0:
            raise ValueError(
                f"opinions_per_round ({self.opinions_per_round}) must divide "
                f"total_opinions ({self.total_opinions})"
            )
        if self.weight_init not in WEIGHT_INITS:
            raise ValueError(
                f"weight_init must be one of {WEIGHT_INITS}, got {self.weight_init!r}"
            )
        if self.strategy not in STRATEGIES:
            raise ValueError(
                f"strategy must be one of {STRATEGIES}, got {self.strategy!r}"
            )

    @property
    def rounds(self) -> int:
        return self.total_opinions // self.opinions_per_round

    def with_overrides(self, **kwargs) -> "SimParams":
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "SimParams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown parameter(s): {sorted(unknown)}")
        return cls(**d)


@dataclass
class Opinion:
    """One authored idea vector with its global sequence position."""

    id: int
    author: int
    content: np.ndarray
    round: int


class SimulationState:
    """Mutable state of one run; confined to a single worker.

    Stream layout: the base stream drives initialization and per-round
    opinion generation in a fixed order. Per-agent state noise comes from
    child streams keyed (1, round, agent) and metric shuffles from child
    streams keyed (2, round), so consumers cannot perturb each other.
    """

    # child-stream tags
    _TAG_STATE_NOISE = 1
    _TAG_METRICS = 2

    def __init__(self, params: SimParams, rng: RngStream,
                 idea_states: np.ndarray, weights: np.ndarray):
        self.params = params
        self.rng = rng
        self.idea_states = idea_states
        self.weights = weights
        self.opinion_log: list[Opinion] = []
        self.round_pool: list[Opinion] = []
        self.round_counter = 0
        n, w = params.n, params.recent_window
        self._recent_buf = np.zeros((n, w, params.k))
        self._recent_count = np.zeros(n, dtype=np.int64)
        self._recent_head = np.zeros(n, dtype=np.int64)

    # -- recent-opinion window ------------------------------------------------

    def push_recent(self, agent: int, content: np.ndarray) -> None:
        """Append to the agent's recent-opinion window, evicting the oldest."""
        w = self.params.recent_window
        self._recent_buf[agent, self._recent_head[agent]] = content
        self._recent_head[agent] = (self._recent_head[agent] + 1) % w
        if self._recent_count[agent] < w:
            self._recent_count[agent] += 1

    def recent_opinions(self, agent: int) -> list[np.ndarray]:
        """Contents of the agent's window, oldest first."""
        w = self.params.recent_window
        count = int(self._recent_count[agent])
        head = int(self._recent_head[agent])
        return [self._recent_buf[agent, (head - count + i) % w].copy()
                for i in range(count)]

    def recent_average(self, agent: int) -> np.ndarray:
        """Mean of the agent's recent opinions; its idea state if none exist.

        The fallback keeps homophily/novelty comparisons and eccentricity
        defined from the very first round: the idea state is the generator
        of the agent's opinions and hence the best available proxy.
        """
        count = self._recent_count[agent]
        if count == 0:
            return self.idea_states[agent].copy()
        return self._recent_buf[agent].sum(axis=0) / count

    def recent_average_matrix(self) -> np.ndarray:
        """(n, k) matrix of recent averages with the empty-window fallback."""
        counts = np.maximum(self._recent_count, 1)
        avg = self._recent_buf.sum(axis=1) / counts[:, None]
        empty = self._recent_count == 0
        if empty.any():
            avg[empty] = self.idea_states[empty]
        return avg

    def refresh_recent_average_row(self, out: np.ndarray, agent: int) -> None:
        """Update one row of a cached recent-average matrix in place."""
        out[agent] = self.recent_average(agent)

    # -- derived streams --------------------------------------------------------

    def noise_stream(self, round_index: int, agent: int) -> RngStream:
        """State-noise stream keyed by position, not call order."""
        return self.rng.child(self._TAG_STATE_NOISE, round_index, agent)

    def metrics_stream(self, round_index: int) -> RngStream:
        """Stream for metric-side shuffles; independent of the trajectory."""
        return self.rng.child(self._TAG_METRICS, round_index)

    @property
    def next_opinion_id(self) -> int:
        return len(self.opinion_log)


def init_network(params: SimParams) -> SimulationState:
    """Build the initial fully connected network for a run.

    Draw order is fixed (idea states first, then the weight matrix,
    row-major) so a seed pins the initial state bit-for-bit.
    """
    params.validate()
    rng = RngStream(params.seed)
    idea_states = rng.uniform(0.0, 1.0, (params.n, params.k))
    raw = rng.uniform(0.0, 1.0, (params.n, params.n))
    if params.weight_init == "power_law":
        weights = power_law_inverse_cdf(raw, PowerLawSpec())
    else:
        weights = raw
    np.fill_diagonal(weights, 0.0)
    return SimulationState(params, rng, idea_states, weights)


def distance(x: np.ndarray, y: np.ndarray, normalize: bool) -> float:
    """Euclidean distance, optionally divided by sqrt(k).

    Normalization rescales distances between points of the unit cube into
    [0, 1], keeping them comparable with the fixed thresholds theta_h and
    theta_a regardless of the idea dimension.
    """
    d = float(np.sqrt(((x - y) ** 2).sum()))
    if normalize:
        d /= float(np.sqrt(len(x)))
    return d


def exposed_average(user: int, exposure: list[Opinion], weights: np.ndarray) -> np.ndarray:
    """Weighted mean of exposed opinion contents.

    Each opinion is weighted by the edge from its author into the user.
    Falls back to the unweighted mean when every author weight is zero.
    Raises ValueError on empty exposure; callers skip the conformity and
    novelty terms in that case.
    """
    if not exposure:
        raise ValueError("exposed_average requires a non-empty exposure")
    contents = np.stack([o.content for o in exposure])
    authors = np.fromiter((o.author for o in exposure), dtype=np.int64)
    w = weights[user, authors]
    total = w.sum()
    if total == 0.0:
        return contents.mean(axis=0)
    return (w @ contents) / total


# -- snapshot serialization ------------------------------------------------

def snapshot(state: SimulationState) -> dict:
    """JSON-ready view of a run's state (params, states, weights, log)."""
    return {
        "format": SNAPSHOT_FORMAT,
        "params": state.params.to_dict(),
        "round_counter": state.round_counter,
        "idea_states": state.idea_states.tolist(),
        "weights": state.weights.tolist(),
        "opinion_log": [
            {"id": o.id, "author": o.author, "round": o.round,
             "content": o.content.tolist()}
            for o in state.opinion_log
        ],
    }


def snapshot_to_json(state: SimulationState) -> str:
    return json.dumps(snapshot(state), indent=1)


def load_snapshot(doc: dict) -> SimulationState:
    """Rebuild a state view from a snapshot for comparison or analysis.

    The recent-opinion windows are reconstructed from the opinion log; the
    random stream restarts from the seed, so a loaded snapshot supports
    inspection and metric evaluation, not bit-exact resumption.
    """
    if doc.get("format") != SNAPSHOT_FORMAT:
        raise ValueError(f"unsupported snapshot format: {doc.get('format')!r}")
    params = SimParams.from_dict(doc["params"])
    state = SimulationState(
        params,
        RngStream(params.seed),
        np.asarray(doc["idea_states"], dtype=np.float64),
        np.asarray(doc["weights"], dtype=np.float64),
    )
    state.round_counter = doc["round_counter"]
    for rec in doc["opinion_log"]:
        opinion = Opinion(rec["id"], rec["author"],
                          np.asarray(rec["content"], dtype=np.float64), rec["round"])
        state.opinion_log.append(opinion)
        state.push_recent(opinion.author, opinion.content)
    return state
