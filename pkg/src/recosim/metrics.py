"""Measurement suite: community structure, dispersion, and eccentricity.

Community detection runs on an undirected projection of the directed
weight matrix (mean of the two directions, near-zero entries dropped).
Louvain is implemented here directly so partitions are deterministic
given (graph, seed) and cheap to audit against exhaustive search on
small graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sampling import RngStream
from .state import SimulationState, Opinion, distance

EDGE_DROP_THRESHOLD = 1e-9
_GAIN_EPS = 1e-12      # minimum raw gain for a single node move
_MAX_SWEEPS = 200


@dataclass
class MetricsRecord:
    round: int
    modularity: float
    community_count: int
    community_state_std: float


def symmetrize(weights: np.ndarray,
               drop_below: float = EDGE_DROP_THRESHOLD) -> np.ndarray:
    """Undirected projection s[i,j] = (w[i,j] + w[j,i]) / 2.

    Entries below drop_below are zeroed; the diagonal is cleared.
    """
    s = (weights + weights.T) / 2.0
    s[s < drop_below] = 0.0
    np.fill_diagonal(s, 0.0)
    return s


def modularity(sym: np.ndarray, assignment: np.ndarray) -> float:
    """Weighted Newman modularity of a partition on a symmetric graph.

    Q = (1/2m) * sum_ij [s_ij - d_i d_j / 2m] delta(c_i, c_j).
    Returns 0 for an edgeless graph.
    """
    two_m = sym.sum()
    if two_m <= 0.0:
        return 0.0
    degrees = sym.sum(axis=1)
    labels = np.unique(assignment)
    q = 0.0
    for label in labels:
        members = np.flatnonzero(assignment == label)
        internal = sym[np.ix_(members, members)].sum()
        total_degree = degrees[members].sum()
        q += internal / two_m - (total_degree / two_m) ** 2
    return float(q)


def _one_level(m: np.ndarray, comm_of: np.ndarray, two_m: float,
               rng: RngStream) -> bool:
    """Greedy local moves until no single move improves modularity.

    Nodes are visited in a shuffled order; candidate communities in
    ascending label order, so ties resolve to the smallest label.
    Mutates comm_of in place; returns whether anything moved.
    """
    n = m.shape[0]
    degrees = m.sum(axis=1)
    comm_tot = np.bincount(comm_of, weights=degrees, minlength=n)
    moved_any = False
    for _ in range(_MAX_SWEEPS):
        moved = False
        order = np.arange(n)
        rng.shuffle(order)
        for i in order:
            current = comm_of[i]
            row = m[i].copy()
            row[i] = 0.0  # self-loop stays with the node; not a link
            links = np.bincount(comm_of, weights=row, minlength=n)
            comm_tot[current] -= degrees[i]
            candidates = np.flatnonzero(links > 0.0)
            stay_gain = links[current] - comm_tot[current] * degrees[i] / two_m
            best_comm, best_gain = current, stay_gain
            if len(candidates):
                gains = links[candidates] - comm_tot[candidates] * degrees[i] / two_m
                pick = int(np.argmax(gains))
                if gains[pick] > best_gain + _GAIN_EPS:
                    best_comm, best_gain = int(candidates[pick]), gains[pick]
            comm_tot[best_comm] += degrees[i]
            if best_comm != current:
                comm_of[i] = best_comm
                moved = moved_any = True
        if not moved:
            break
    return moved_any


def _aggregate(m: np.ndarray, comm_of: np.ndarray) -> np.ndarray:
    """Collapse communities into supernodes; self-loops carry internal weight."""
    n_comms = comm_of.max() + 1
    indicator = np.zeros((m.shape[0], n_comms))
    indicator[np.arange(m.shape[0]), comm_of] = 1.0
    return indicator.T @ m @ indicator


def louvain(sym: np.ndarray, rng: RngStream, gain_tol: float = 1e-7) -> np.ndarray:
    """Two-phase Louvain partition of a symmetric weighted graph.

    Local move passes alternate with community aggregation until a level
    improves modularity by no more than gain_tol. An edgeless graph maps
    to singletons. Returns a dense community assignment per node,
    numbered by first appearance.
    """
    n = sym.shape[0]
    assignment = np.arange(n)
    two_m = sym.sum()
    if two_m <= 0.0:
        return assignment
    level = sym.copy()
    comm_of = np.arange(n)
    if not _one_level(level, comm_of, two_m, rng):
        return assignment
    comm_of = np.unique(comm_of, return_inverse=True)[1]
    assignment = comm_of[assignment]
    best_q = modularity(sym, assignment)
    while True:
        level = _aggregate(level, comm_of)
        comm_of = np.arange(level.shape[0])
        if not _one_level(level, comm_of, two_m, rng):
            break
        comm_of = np.unique(comm_of, return_inverse=True)[1]
        candidate = comm_of[assignment]
        q = modularity(sym, candidate)
        if q - best_q <= gain_tol:
            break
        assignment, best_q = candidate, q
    return _renumber_by_first_seen(assignment)


def _renumber_by_first_seen(assignment: np.ndarray) -> np.ndarray:
    mapping: dict[int, int] = {}
    out = np.empty_like(assignment)
    for i, label in enumerate(assignment):
        out[i] = mapping.setdefault(int(label), len(mapping))
    return out


def community_state_std(assignment: np.ndarray, idea_states: np.ndarray,
                        normalize: bool) -> float:
    """Dispersion of community mean idea vectors around their centroid.

    Root-mean-square distance of per-community means from their unweighted
    grand mean; reduces to the ordinary standard deviation when k = 1.
    """
    labels = np.unique(assignment)
    means = np.stack([idea_states[assignment == label].mean(axis=0)
                      for label in labels])
    grand = means.mean(axis=0)
    sq = ((means - grand) ** 2).sum(axis=1)
    if normalize:
        sq /= idea_states.shape[1]
    return float(np.sqrt(sq.mean()))


def eccentricity_against(content: np.ndarray, author: int, weights: np.ndarray,
                         recent_avg: np.ndarray, normalize: bool) -> float:
    """Distance of an opinion from its author's knowledge-base center.

    The center is the in-weight-weighted mean of the other agents' recent
    averages; unweighted over the others when every in-weight is zero.
    """
    w = weights[author]
    total = w.sum()
    if total == 0.0:
        n = weights.shape[0]
        center = (recent_avg.sum(axis=0) - recent_avg[author]) / (n - 1)
    else:
        center = (w @ recent_avg) / total   # diagonal is 0: author excluded
    return distance(content, center, normalize)


def eccentricity(opinion: Opinion, state: SimulationState) -> float:
    """Eccentricity of an opinion against the state's current snapshot.

    The harness evaluates this at the opinion's generation step; calling
    it later measures against whatever the network looks like then.
    """
    return eccentricity_against(opinion.content, opinion.author, state.weights,
                                state.recent_average_matrix(),
                                state.params.normalize_distance)


def record_round_metrics(state: SimulationState) -> MetricsRecord:
    """Partition the current network and record the round's metrics.

    Call after a round's update; the record is stamped with the completed
    round's index. The Louvain shuffle draws from a stream keyed by that
    round, leaving the trajectory stream untouched.
    """
    completed = state.round_counter - 1
    sym = symmetrize(state.weights)
    assignment = louvain(sym, state.metrics_stream(completed))
    return MetricsRecord(
        round=completed,
        modularity=modularity(sym, assignment),
        community_count=int(assignment.max()) + 1,
        community_state_std=community_state_std(
            assignment, state.idea_states, state.params.normalize_distance),
    )
