"""Exposure strategies: which opinions a user sees and which edges update.

Six strategies share one contract. Given the current round's opinion pool
and the network state they produce, per user, an ExposureSet holding the
opinions the user is exposed to (possibly none) and the partner ids whose
incoming edges w[user, partner] will be updated this round.

  SC   strongest connections: top-weighted neighbors and their opinions
  NO   nearest opinions to the user's idea state
  FO   farthest opinions from the user's idea state
  NU   active users with the nearest idea states (edges only)
  FU   active users with the farthest idea states (edges only)
  NOU  union of NO and NU edge partners, opinions from NO

Users are never recommended themselves or their own opinions. All
selections are deterministic: ties resolve toward the smaller opinion or
agent id, and opinions/partners are kept in ascending id order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .state import Opinion, SimulationState


@dataclass
class ExposureSet:
    user: int
    opinions: list[Opinion] = field(default_factory=list)
    edge_partners: list[int] = field(default_factory=list)


def select_k_smallest(values: np.ndarray, tie_ids: np.ndarray, k: int) -> np.ndarray:
    """Positions of the k smallest values, ties broken by smaller tie id.

    Average O(len(values)) via partitioning; equivalent to sorting by
    (value, tie_id) and taking the first k, which the tests use as oracle.
    """
    m = len(values)
    if k >= m:
        return np.lexsort((tie_ids, values))
    kth = np.partition(values, k - 1)[k - 1]
    strict = np.flatnonzero(values < kth)
    need = k - len(strict)
    at_cut = np.flatnonzero(values == kth)
    chosen = at_cut[np.argsort(tie_ids[at_cut], kind="stable")[:need]]
    return np.concatenate([strict, chosen])


def _pool_distances(state: SimulationState, user: int,
                    opinions: list[Opinion]) -> np.ndarray:
    contents = np.stack([o.content for o in opinions])
    sq = ((contents - state.idea_states[user]) ** 2).sum(axis=1)
    d = np.sqrt(sq)
    if state.params.normalize_distance:
        d /= np.sqrt(state.params.k)
    return d


def _user_distances(state: SimulationState, user: int,
                    candidates: np.ndarray) -> np.ndarray:
    diff = state.idea_states[candidates] - state.idea_states[user]
    d = np.sqrt((diff**2).sum(axis=1))
    if state.params.normalize_distance:
        d /= np.sqrt(state.params.k)
    return d


def _non_self_pool(state: SimulationState, user: int) -> list[Opinion]:
    return [o for o in state.round_pool if o.author != user]


def _active_candidates(state: SimulationState, user: int) -> np.ndarray:
    """Distinct authors of the round pool, excluding the user."""
    authors = np.unique(np.fromiter((o.author for o in state.round_pool),
                                    dtype=np.int64, count=len(state.round_pool)))
    return authors[authors != user]


def strongest_connections(state: SimulationState, user: int) -> ExposureSet:
    """Top-weighted in-neighbors; exposed to whatever they authored this round.

    Edge partners are fixed by weight rank even when some authored nothing,
    so their edges still update.
    """
    n = state.params.n
    size = min(state.params.recommendation_size, n - 1)
    others = np.concatenate([np.arange(user), np.arange(user + 1, n)])
    picks = select_k_smallest(-state.weights[user, others], others, size)
    partners = np.sort(others[picks])
    partner_set = set(int(j) for j in partners)
    opinions = [o for o in state.round_pool if o.author in partner_set]
    return ExposureSet(user, opinions, [int(j) for j in partners])


def nearest_opinions(state: SimulationState, user: int) -> ExposureSet:
    return _opinion_strategy(state, user, farthest=False)


def farthest_opinions(state: SimulationState, user: int) -> ExposureSet:
    return _opinion_strategy(state, user, farthest=True)


def _opinion_strategy(state: SimulationState, user: int, farthest: bool) -> ExposureSet:
    eligible = _non_self_pool(state, user)
    if not eligible:
        return ExposureSet(user)
    d = _pool_distances(state, user, eligible)
    ids = np.fromiter((o.id for o in eligible), dtype=np.int64, count=len(eligible))
    size = min(state.params.recommendation_size, len(eligible))
    picks = select_k_smallest(-d if farthest else d, ids, size)
    chosen = sorted((eligible[i] for i in picks), key=lambda o: o.id)
    partners = sorted({o.author for o in chosen})
    return ExposureSet(user, chosen, partners)


def nearest_users(state: SimulationState, user: int) -> ExposureSet:
    return _user_strategy(state, user, farthest=False)


def farthest_users(state: SimulationState, user: int) -> ExposureSet:
    return _user_strategy(state, user, farthest=True)


def _user_strategy(state: SimulationState, user: int, farthest: bool) -> ExposureSet:
    """Edge updates toward active users ranked by idea-state distance.

    Recommending users exposes no opinions, so the caller leaves the
    user's idea state untouched.
    """
    candidates = _active_candidates(state, user)
    if len(candidates) == 0:
        return ExposureSet(user)
    d = _user_distances(state, user, candidates)
    size = min(state.params.recommendation_size, len(candidates))
    picks = select_k_smallest(-d if farthest else d, candidates, size)
    partners = sorted(int(j) for j in candidates[picks])
    return ExposureSet(user, [], partners)


def nearest_opinions_and_users(state: SimulationState, user: int) -> ExposureSet:
    """NO opinions plus the union of NO-author and NU edge partners.

    An edge selected by both halves updates once.
    """
    no = nearest_opinions(state, user)
    nu = nearest_users(state, user)
    partners = sorted(set(no.edge_partners) | set(nu.edge_partners))
    return ExposureSet(user, no.opinions, partners)


STRATEGY_FUNCS = {
    "SC": strongest_connections,
    "NO": nearest_opinions,
    "FO": farthest_opinions,
    "NU": nearest_users,
    "FU": farthest_users,
    "NOU": nearest_opinions_and_users,
}


def compute_exposures(state: SimulationState) -> list[ExposureSet]:
    """Exposure sets for every user under the configured strategy."""
    fn = STRATEGY_FUNCS[state.params.strategy]
    return [fn(state, user) for user in range(state.params.n)]
