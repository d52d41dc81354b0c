"""The co-evolution loop: opinion generation and synchronous round updates.

A round generates a fixed number of opinions from uniformly sampled
authors (with replacement), then updates every agent's idea state and the
exposure-selected edge weights in one synchronous step:

  new opinion      O_j = X_j + noise
  idea state       dX_i = c * (exposed_mean_i - X_i) + noise
  edge weight      dw_ji = h * (theta_h - |X_i - recent_j|)
                         + a * (|exposed_i - recent_j| - theta_a)

Distances honor the run's normalize_distance flag. All deltas are
computed from the post-generation snapshot and applied together, so the
result does not depend on agent processing order; per-agent state noise
is keyed by (round, agent id) to keep that exact. Weights are clamped to
[0, 1] after application; idea states are left unclamped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .sampling import fluctuation
from .recommend import ExposureSet, compute_exposures
from .state import Opinion, SimulationState, exposed_average


@dataclass
class RoundUpdate:
    """Deltas of one synchronous update, for inspection and testing."""

    round: int
    state_deltas: np.ndarray                      # (n, k)
    weight_deltas: list[tuple[int, int, float]] = field(default_factory=list)


def generate_opinion(state: SimulationState, author: int) -> Opinion:
    """Author one opinion: idea state plus bounded noise.

    Appends to the global log, the round pool, and the author's recent
    window (evicting beyond the window size).
    """
    params = state.params
    content = state.idea_states[author] + fluctuation(
        state.rng, params.k, params.opinion_noise
    )
    opinion = Opinion(
        id=state.next_opinion_id,
        author=author,
        content=content,
        round=state.next_opinion_id // params.opinions_per_round,
    )
    state.opinion_log.append(opinion)
    state.round_pool.append(opinion)
    state.push_recent(author, content)
    return opinion


def effective_exposed(user: int, exposure: ExposureSet, state: SimulationState,
                      recent_avg: np.ndarray) -> np.ndarray | None:
    """The user's information-environment center used by the novelty term.

    With exposed opinions this is their weighted mean. User-recommendation
    strategies expose none, so the weighted mean of the recommended
    partners' recent averages stands in (unweighted when all edge weights
    are zero). None when the exposure is completely empty.
    """
    if exposure.opinions:
        return exposed_average(user, exposure.opinions, state.weights)
    if not exposure.edge_partners:
        return None
    partners = np.asarray(exposure.edge_partners, dtype=np.int64)
    w = state.weights[user, partners]
    total = w.sum()
    if total == 0.0:
        return recent_avg[partners].mean(axis=0)
    return (w @ recent_avg[partners]) / total


def idea_state_delta(user: int, exposure: ExposureSet,
                     state: SimulationState) -> np.ndarray:
    """Conformity pull toward the exposed mean, plus keyed state noise.

    Without exposed opinions (silent SC neighbors, NU, FU) only the noise
    term applies.
    """
    params = state.params
    noise = fluctuation(state.noise_stream(state.round_counter, user),
                        params.k, params.state_noise)
    if not exposure.opinions:
        return noise
    x_exp = exposed_average(user, exposure.opinions, state.weights)
    return params.c * (x_exp - state.idea_states[user]) + noise


def _partner_weight_deltas(user: int, exposure: ExposureSet,
                           state: SimulationState,
                           recent_avg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw weight deltas for every edge partner of one user."""
    params = state.params
    partners = np.asarray(exposure.edge_partners, dtype=np.int64)
    if len(partners) == 0:
        return partners, np.zeros(0)
    scale = np.sqrt(params.k) if params.normalize_distance else 1.0
    rec = recent_avg[partners]
    d_h = np.sqrt(((state.idea_states[user] - rec) ** 2).sum(axis=1)) / scale
    center = effective_exposed(user, exposure, state, recent_avg)
    d_a = np.sqrt(((center - rec) ** 2).sum(axis=1)) / scale
    dw = params.h * (params.theta_h - d_h) + params.a * (d_a - params.theta_a)
    return partners, dw


def edge_weight_delta(user: int, partner: int, exposure: ExposureSet,
                      state: SimulationState) -> float:
    """Raw homophily + novelty delta for one recommended edge.

    The caller clamps the updated weight into [0, 1] on application.
    """
    if partner not in exposure.edge_partners:
        raise ValueError(f"agent {partner} is not an edge partner of user {user}")
    partners, dw = _partner_weight_deltas(user, exposure, state,
                                          state.recent_average_matrix())
    return float(dw[list(partners).index(partner)])


def run_round(state: SimulationState, authors: np.ndarray | None = None,
              eccentricity_out: list | None = None) -> RoundUpdate:
    """Advance the simulation by one full round.

    Generates opinions_per_round opinions (authors sampled uniformly with
    replacement unless given explicitly), computes every exposure set and
    all deltas from the post-generation snapshot, applies them at once,
    clamps weights, and clears the pool.

    When eccentricity_out is a list, each new opinion's eccentricity is
    appended as (round, opinion id, author, value), evaluated against the
    network as it stands at that opinion's generation step.
    """
    params = state.params
    round_index = state.round_counter
    if authors is None:
        authors = state.rng.integers(0, params.n, params.opinions_per_round)
    recent_avg = state.recent_average_matrix()
    for author in authors:
        opinion = generate_opinion(state, int(author))
        if eccentricity_out is not None:
            value = metrics.eccentricity_against(
                opinion.content, opinion.author, state.weights, recent_avg,
                params.normalize_distance)
            eccentricity_out.append((round_index, opinion.id, opinion.author, value))
        # only the author's row went stale; keep the cache current
        state.refresh_recent_average_row(recent_avg, opinion.author)

    exposures = compute_exposures(state)
    state_deltas = np.zeros_like(state.idea_states)
    weight_rows: list[tuple[int, np.ndarray, np.ndarray]] = []
    for user in range(params.n):
        exposure = exposures[user]
        state_deltas[user] = idea_state_delta(user, exposure, state)
        partners, dw = _partner_weight_deltas(user, exposure, state, recent_avg)
        if len(partners):
            weight_rows.append((user, partners, dw))

    state.idea_states += state_deltas
    for user, partners, dw in weight_rows:
        state.weights[user, partners] = np.clip(
            state.weights[user, partners] + dw, 0.0, 1.0)
    state.round_counter += 1
    state.round_pool.clear()
    return RoundUpdate(
        round=round_index,
        state_deltas=state_deltas,
        weight_deltas=[(u, int(j), float(d))
                       for u, ps, ds in weight_rows
                       for j, d in zip(ps, ds)],
    )
