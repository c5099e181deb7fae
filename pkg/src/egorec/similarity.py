"""Jaccard similarity and top-k neighbor selection over candidate pools."""
from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from egorec import _rng
from egorec._parallel import pmap
from egorec.dataset import Dataset

POOL_KINDS = ("friends", "non_friends", "full_network", "random_k")


@dataclass(frozen=True)
class NeighborPoolSpec:
    """Where neighbors of a core user are drawn from.

    ``random_k`` samples k members of ``base`` uniformly without replacement
    (seeded per user from ``seed``) instead of taking the most similar ones.
    """

    kind: str
    base: str = "full_network"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in POOL_KINDS:
            raise ValueError(f"unknown pool kind {self.kind!r}; expected one of {POOL_KINDS}")
        if self.base not in POOL_KINDS[:3]:
            raise ValueError(f"random_k base must be one of {POOL_KINDS[:3]}, got {self.base!r}")

    @property
    def label(self) -> str:
        return f"random_{self.base}" if self.kind == "random_k" else self.kind

    def reseeded(self, seed: int) -> NeighborPoolSpec:
        return NeighborPoolSpec(self.kind, self.base, seed)


FRIENDS = NeighborPoolSpec("friends")
NON_FRIENDS = NeighborPoolSpec("non_friends")
FULL_NETWORK = NeighborPoolSpec("full_network")


class ScoredNeighbor(NamedTuple):
    user: int
    similarity: float


def jaccard(a: Iterable[int], b: Iterable[int]) -> float:
    """|a & b| / |a | b|, with 0.0 for two empty sets."""
    a, b = set(a), set(b)
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def similarity_vector(d: Dataset, basis: np.ndarray | Sequence[int]) -> np.ndarray:
    """Jaccard between ``basis`` and every user's full itemset, indexed by user id."""
    basis = np.unique(np.asarray(basis, dtype=np.int64))
    indicator = np.zeros(d.n_items, dtype=np.int32)
    indicator[basis] = 1
    inter = d.prefs.matrix @ indicator
    union = d.prefs.user_degrees + len(basis) - inter
    out = np.zeros(d.n_users, dtype=np.float64)
    np.divide(inter, union, out=out, where=union > 0)
    return out


def pool_members(d: Dataset, u: int, pool: NeighborPoolSpec) -> np.ndarray:
    """Sorted candidate ids for ``u`` (before any random_k sampling)."""
    kind = pool.base if pool.kind == "random_k" else pool.kind
    if kind == "friends":
        return d.friends(u)
    if kind == "non_friends":
        return d.non_friends(u)
    return d.full_network(u)


def rank_members(sims: np.ndarray, members: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-k of sorted ``members`` by (similarity desc, id asc)."""
    if k <= 0 or len(members) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    s = sims[members]
    positive = s > 0
    cand = members[positive]
    order = np.lexsort((cand, -s[positive]))[:k]
    top = cand[order]
    if len(top) < k:
        # members is sorted, so zero-similarity fill is already in id order
        top = np.concatenate([top, members[~positive][: k - len(top)]])
    return top, sims[top]


def _check_core(d: Dataset, u: int) -> None:
    if not d.is_core(u):
        raise KeyError(f"unknown core user {u}")


def select_neighbors(
    d: Dataset, u: int, pool: NeighborPoolSpec, k: int, sims: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    members = pool_members(d, u, pool)
    if pool.kind == "random_k" and len(members) > k:
        gen = _rng.rng(pool.seed, "random-k", u)
        members = np.sort(gen.choice(members, size=k, replace=False))
    return rank_members(sims, members, k)


def top_k_neighbors(
    d: Dataset,
    u: int,
    pool: NeighborPoolSpec,
    k: int,
    basis: np.ndarray | Sequence[int] | None = None,
) -> list[ScoredNeighbor]:
    """The k pool members most similar to ``basis`` (default: all of u's likes).

    Ties go to the lower user id. Fewer than k come back when the pool is
    smaller than k.
    """
    _check_core(d, u)
    if k <= 0:
        return []
    if basis is None:
        basis = d.prefs.items_of(u)
    ids, sims = select_neighbors(d, u, pool, k, similarity_vector(d, basis))
    return [ScoredNeighbor(int(v), float(s)) for v, s in zip(ids, sims)]


def _user_topk_prefix_means(d: Dataset, task: tuple[int, str, int]) -> np.ndarray:
    u, kind, kmax = task
    sims = similarity_vector(d, d.prefs.items_of(u))
    _, top = rank_members(sims, pool_members(d, u, NeighborPoolSpec(kind)), kmax)
    return np.cumsum(top) / np.arange(1, len(top) + 1)


def similarity_curve(d: Dataset, ks: Iterable[int], pool_kind: str, workers: int = 1) -> dict[int, float]:
    """Average top-k similarity for each k in ``ks`` (one neighbor ranking per user).

    Users with fewer than k pool members contribute the mean over what they
    have; users with an empty pool are left out.
    """
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ValueError("k values must be >= 1")
    if pool_kind not in ("friends", "non_friends", "full_network"):
        raise ValueError(f"pool kind must be friends, non_friends or full_network, got {pool_kind!r}")
    if d.graph.n_core == 0:
        raise ValueError("no core users")
    tasks = [(int(u), pool_kind, ks[-1]) for u in d.graph.core_users]
    prefix = [p for p in pmap(_user_topk_prefix_means, d, tasks, workers) if len(p)]
    return {k: float(np.mean([p[min(k, len(p)) - 1] for p in prefix])) for k in ks}


def avg_topk_similarity(d: Dataset, k: int, pool_kind: str) -> float:
    return similarity_curve(d, [k], pool_kind)[k]


def _user_friend_vs_random(d: Dataset, task: tuple[int, int, int]) -> tuple[float, float]:
    u, repeats, seed = task
    sims = similarity_vector(d, d.prefs.items_of(u))
    friends = d.friends(u)
    others = d.non_friends(u)
    friends_avg = float(np.mean(sims[friends]))
    if len(others) == 0:
        return friends_avg, np.nan
    size = min(len(friends), len(others))
    gen = _rng.rng(seed, "friend-vs-random", u)
    draws = [np.mean(sims[gen.choice(others, size=size, replace=False)]) for _ in range(repeats)]
    return friends_avg, float(np.mean(draws))


def friend_vs_random_similarity(d: Dataset, repeats: int = 10, seed: int = 0, workers: int = 1) -> tuple[float, float]:
    """Mean Jaccard of each core user to all friends vs. to as many random non-friends.

    The random side is averaged over ``repeats`` resamples per user. Users
    with no non-friends at all are left out of the random average.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    tasks = [(int(u), repeats, seed) for u in d.graph.core_users]
    res = np.array(pmap(_user_friend_vs_random, d, tasks, workers), dtype=np.float64)
    random_col = res[:, 1]
    random_avg = float(np.mean(random_col[~np.isnan(random_col)])) if np.any(~np.isnan(random_col)) else 0.0
    return float(np.mean(res[:, 0])), random_avg
