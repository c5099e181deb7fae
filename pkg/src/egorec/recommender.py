"""Jaccard-weighted k-nn top-N recommendation and NDCG evaluation."""
from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from egorec import _rng
from egorec._parallel import pmap
from egorec.dataset import Dataset
from egorec.similarity import NeighborPoolSpec, select_neighbors, similarity_vector

DEFAULT_LIST_LEN = 10
DEFAULT_K_SWEEP = (10, 20, 30, 40, 50)
# scores closer than this are ranked as ties (float sums of equal fractions can differ in the last ulp)
SCORE_DECIMALS = 10


class SkippedUser(ValueError):
    """A core user that cannot be evaluated (too few likes, empty test set)."""


@dataclass(frozen=True)
class TrainTestSplit:
    user: int
    train: np.ndarray
    test: np.ndarray
    ratio: float
    seed: int


@dataclass(frozen=True)
class RecommendationList:
    user: int
    entries: tuple[tuple[int, float], ...]

    @property
    def items(self) -> list[int]:
        return [i for i, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class EvalResult:
    """NDCG for one (pool, k): per-split user means, then mean/std over splits."""

    condition: str
    k: int
    mean_ndcg: float
    std_ndcg: float
    n_users: int
    n_skipped: int
    n_splits: int
    split_means: tuple[float, ...]
    split_stds: tuple[float, ...]


def held_out_size(n_likes: int, ratio: float) -> int:
    """Held-out count: (1 - ratio) * n rounded half up, kept within [1, n - 1]."""
    n_test = math.floor((1.0 - ratio) * n_likes + 0.5)
    return min(max(n_test, 1), n_likes - 1)


def split_likes(d: Dataset, u: int, ratio: float = 0.7, seed: int = 0) -> TrainTestSplit:
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    likes = d.prefs.items_of(u)
    if len(likes) < 2:
        raise SkippedUser(f"user {u} has {len(likes)} like(s); at least 2 are needed to split")
    perm = _rng.rng(seed, "split", u).permutation(likes)
    n_test = held_out_size(len(likes), ratio)
    return TrainTestSplit(u, np.sort(perm[n_test:]), np.sort(perm[:n_test]), ratio, seed)


def rank_items(
    d: Dataset,
    u: int,
    train: np.ndarray | Sequence[int],
    neighbors: np.ndarray,
    weights: np.ndarray,
    list_len: int = DEFAULT_LIST_LEN,
) -> RecommendationList:
    """Score every item liked by ``neighbors`` by the summed weights of its likers.

    Train items are excluded; order is (score desc, global popularity desc,
    item id asc).
    """
    if len(neighbors) == 0 or list_len <= 0:
        return RecommendationList(u, ())
    m = d.prefs.matrix
    starts, ends = m.indptr[neighbors], m.indptr[neighbors + 1]
    liked = np.concatenate([m.indices[a:b] for a, b in zip(starts, ends)])
    w = np.repeat(np.asarray(weights, dtype=np.float64), ends - starts)
    cand, inverse = np.unique(liked, return_inverse=True)
    scores = np.bincount(inverse, weights=w, minlength=len(cand))
    keep = ~np.isin(cand, np.asarray(train, dtype=np.int64))
    cand, scores = cand[keep], scores[keep]
    pop = d.prefs.item_degrees[cand]
    order = np.lexsort((cand, -pop, -np.round(scores, SCORE_DECIMALS)))[:list_len]
    return RecommendationList(u, tuple((int(cand[j]), float(scores[j])) for j in order))


def recommend(
    d: Dataset,
    u: int,
    train: np.ndarray | Sequence[int],
    pool: NeighborPoolSpec,
    k: int,
    list_len: int = DEFAULT_LIST_LEN,
) -> RecommendationList:
    """Top ``list_len`` items from the k nearest pool members of ``u``.

    Neighbors are chosen by Jaccard similarity to ``train`` and each liked
    item is credited with its likers' similarities. When every neighbor has
    similarity 0, the list is the neighbors' items by popularity.
    """
    if not d.is_core(u):
        raise KeyError(f"unknown core user {u}")
    train = np.asarray(train, dtype=np.int64)
    nbrs, w = select_neighbors(d, u, pool, k, similarity_vector(d, train))
    return rank_items(d, u, train, nbrs, w, list_len)


def ndcg(rec: RecommendationList | Sequence[int], test: Iterable[int], cutoff: int = DEFAULT_LIST_LEN) -> float:
    """Hit-based NDCG over the first N = min(cutoff, |test|) ranks.

    Rank 1 is undiscounted and rank i >= 2 is weighted 1/log2(i); the ideal
    list (all N ranks hits) normalizes the score.
    """
    test = set(test)
    if not test:
        raise SkippedUser("empty test set")
    items = rec.items if isinstance(rec, RecommendationList) else list(rec)
    n = min(cutoff, len(test))
    discounts = [1.0] + [1.0 / math.log2(i) for i in range(2, n + 1)]
    gain = sum(w for w, item in zip(discounts, items) if item in test)
    return gain / sum(discounts)


# -- evaluation ------------------------------------------------------------


@dataclass(frozen=True)
class _EvalPlan:
    conditions: tuple[NeighborPoolSpec, ...]
    ks: tuple[int, ...]
    list_len: int
    ratio: float


def _eval_task(shared: tuple[Dataset, _EvalPlan], task: tuple[int, int]) -> np.ndarray | None:
    d, plan = shared
    split_seed, u = task
    try:
        split = split_likes(d, u, plan.ratio, split_seed)
    except SkippedUser:
        return None
    sims = similarity_vector(d, split.train)
    out = np.empty((len(plan.conditions), len(plan.ks)))
    kmax = max(plan.ks)
    for ci, cond in enumerate(plan.conditions):
        if cond.kind == "random_k":
            pool = cond.reseeded(split_seed)
            for ki, k in enumerate(plan.ks):
                nbrs, w = select_neighbors(d, u, pool, k, sims)
                out[ci, ki] = ndcg(rank_items(d, u, split.train, nbrs, w, plan.list_len), split.test)
        else:
            # top-k is a prefix of top-kmax under a fixed ranking
            nbrs, w = select_neighbors(d, u, cond, kmax, sims)
            for ki, k in enumerate(plan.ks):
                rec = rank_items(d, u, split.train, nbrs[:k], w[:k], plan.list_len)
                out[ci, ki] = ndcg(rec, split.test)
    return out


def evaluate_many(
    d: Dataset,
    conditions: Sequence[NeighborPoolSpec],
    ks: Sequence[int] = DEFAULT_K_SWEEP,
    list_len: int = DEFAULT_LIST_LEN,
    n_splits: int = 10,
    ratio: float = 0.7,
    seed: int = 0,
    workers: int = 1,
) -> list[EvalResult]:
    """Evaluate every (condition, k) pair on the same ``n_splits`` random splits.

    Results are ordered condition-major. Split ``s`` uses a seed derived from
    (seed, s), so a given master seed yields the same splits for every
    condition and every worker count.
    """
    if n_splits < 1:
        raise ValueError("n_splits must be >= 1")
    if not ks or min(ks) < 1:
        raise ValueError("k values must be >= 1")
    plan = _EvalPlan(tuple(conditions), tuple(int(k) for k in ks), list_len, ratio)
    users = [int(u) for u in d.graph.core_users]
    split_seeds = [_rng.sub_seed(seed, "eval-split", s) for s in range(n_splits)]
    tasks = [(ss, u) for ss in split_seeds for u in users]
    per_task = pmap(_eval_task, (d, plan), tasks, workers)

    evaluable = [r is not None for r in per_task[: len(users)]]
    n_users = sum(evaluable)
    if n_users == 0:
        raise ValueError("no evaluable core users (every core user has fewer than 2 likes)")
    # shape: splits x users x conditions x ks
    cube = np.stack([r for r in per_task if r is not None]).reshape(n_splits, n_users, len(plan.conditions), len(plan.ks))
    results = []
    for ci, cond in enumerate(plan.conditions):
        for ki, k in enumerate(plan.ks):
            # contiguous copy: summation order must not depend on which conditions were batched together
            per_user = np.ascontiguousarray(cube[:, :, ci, ki])
            means, stds = per_user.mean(axis=1), per_user.std(axis=1)
            results.append(
                EvalResult(
                    condition=cond.label,
                    k=k,
                    mean_ndcg=float(np.mean(means)),
                    std_ndcg=float(np.std(means)),
                    n_users=n_users,
                    n_skipped=len(users) - n_users,
                    n_splits=n_splits,
                    split_means=tuple(float(x) for x in means),
                    split_stds=tuple(float(x) for x in stds),
                )
            )
    return results


def evaluate(
    d: Dataset,
    condition: NeighborPoolSpec,
    k: int,
    list_len: int = DEFAULT_LIST_LEN,
    n_splits: int = 10,
    ratio: float = 0.7,
    seed: int = 0,
    workers: int = 1,
) -> EvalResult:
    return evaluate_many(d, [condition], [k], list_len, n_splits, ratio, seed, workers)[0]
