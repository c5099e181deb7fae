"""Preference-locality metrics and the null models they are compared against.

Coverage metrics work on the ego x item incidence: an ego network (core user
plus friends) *covers* an item when at least one member likes it.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.sparse as sp

from egorec import _rng
from egorec._parallel import pmap
from egorec.dataset import Dataset, PreferenceStore, SocialGraph
from egorec.similarity import friend_vs_random_similarity

log = logging.getLogger(__name__)

NULL_MODELS = ("item_uniform", "item_degree_preserving", "friend_rewire")
SWAPS_PER_LIKE = 10


@dataclass(frozen=True)
class EgoNetwork:
    core: int
    members: np.ndarray


def ego_networks(d: Dataset) -> list[EgoNetwork]:
    return [EgoNetwork(int(u), d.graph.ego_members(u)) for u in d.graph.core_users]


def ego_membership(d: Dataset) -> sp.csr_matrix:
    """Egos x users 0/1 matrix, one row per core user in sorted order."""
    rows, cols = [], []
    for r, u in enumerate(d.graph.core_users):
        members = d.graph.ego_members(u)
        rows.append(np.full(len(members), r))
        cols.append(members)
    rows_a, cols_a = np.concatenate(rows), np.concatenate(cols)
    return sp.csr_matrix(
        (np.ones(len(rows_a), dtype=np.int32), (rows_a, cols_a)), shape=(d.graph.n_core, d.n_users)
    )


def ego_item_incidence(d: Dataset) -> sp.csr_matrix:
    """Egos x items matrix of like counts within each ego network."""
    return (ego_membership(d) @ d.prefs.matrix).tocsr()


def item_ego_counts(d: Dataset) -> np.ndarray:
    """Number of ego networks covering each item, indexed by item id."""
    incidence = ego_item_incidence(d)
    return np.bincount(incidence.indices, minlength=d.n_items).astype(np.int64)


def ego_sparsity(d: Dataset) -> float:
    """Mean rating density (percent) of each ego network's own user x item matrix.

    The item axis of an ego matrix is the set of items liked by at least one
    member, not the global catalogue.
    """
    incidence = ego_item_incidence(d)
    members = np.diff(ego_membership(d).indptr)
    likes = np.asarray(incidence.sum(axis=1)).ravel()
    items = np.diff(incidence.indptr)
    cells = members * items
    density = np.divide(likes, cells, out=np.zeros(len(likes)), where=cells > 0)
    return float(100.0 * density.mean())


def network_sparsity(d: Dataset) -> float:
    """Density (percent) of the full user x item matrix."""
    cells = d.n_users * d.n_items
    if d.prefs.n_likes == 0 or cells == 0:
        raise ValueError("network_sparsity needs at least one like")
    return 100.0 * d.prefs.n_likes / cells


def uncovered_ego(d: Dataset) -> float:
    """100 minus the mean percentage of ego networks covering a liked item."""
    n_egos = d.graph.n_core
    if n_egos == 0:
        raise ValueError("no ego networks")
    liked = d.prefs.item_degrees > 0
    if not liked.any():
        raise ValueError("uncovered_ego needs at least one liked item")
    coverage = item_ego_counts(d)[liked] / n_egos * 100.0
    return float(100.0 - coverage.mean())


# -- null models -----------------------------------------------------------


@numba.njit(cache=True)
def _swap_kernel(user_ptr, edge_item, picks_a, picks_b, edge_user):  # pragma: no cover - compiled
    done = 0
    for t in range(picks_a.shape[0]):
        a = picks_a[t]
        b = picks_b[t]
        ua = edge_user[a]
        ub = edge_user[b]
        ia = edge_item[a]
        ib = edge_item[b]
        if ua == ub or ia == ib:
            continue
        clash = False
        for e in range(user_ptr[ua], user_ptr[ua + 1]):
            if edge_item[e] == ib:
                clash = True
                break
        if not clash:
            for e in range(user_ptr[ub], user_ptr[ub + 1]):
                if edge_item[e] == ia:
                    clash = True
                    break
        if clash:
            continue
        edge_item[a] = ib
        edge_item[b] = ia
        done += 1
    return done


def double_edge_swap(prefs: PreferenceStore, n_attempts: int, gen: np.random.Generator) -> tuple[PreferenceStore, int]:
    """Bipartite double-edge swaps: (u1,i1),(u2,i2) -> (u1,i2),(u2,i1).

    Swaps that would create a duplicate like are rejected. Every user and
    item keeps its degree. Returns the new store and the accepted count.
    """
    m = prefs.matrix
    user_ptr = m.indptr.astype(np.int64)
    edge_item = m.indices.astype(np.int64).copy()
    edge_user, _ = prefs.pairs()
    if prefs.n_likes < 2:
        return prefs, 0
    picks = gen.integers(0, prefs.n_likes, size=(2, n_attempts))
    done = _swap_kernel(user_ptr, edge_item, picks[0], picks[1], edge_user)
    return PreferenceStore.from_pairs(edge_user, edge_item, prefs.n_users, prefs.n_items), int(done)


def randomize_items(d: Dataset, model: str = "degree_preserving", seed: int = 0,
                    swaps_per_like: int = SWAPS_PER_LIKE) -> Dataset:
    """Same graph, likes redistributed over items.

    ``uniform``: each user keeps its like count and draws that many distinct
    items uniformly. ``degree_preserving``: ``swaps_per_like * |likes|``
    attempted double-edge swaps, so item like counts are kept too.
    """
    gen = _rng.rng(seed, "randomize-items", model)
    prefs = d.prefs
    if model == "uniform":
        degrees = prefs.user_degrees
        if degrees.max(initial=0) > d.n_items:
            raise ValueError("a user's like count exceeds the item universe")
        users = np.repeat(np.arange(d.n_users), degrees)
        items = np.concatenate(
            [gen.choice(d.n_items, size=int(k), replace=False) for k in degrees if k] or [np.empty(0, np.int64)]
        )
        new = PreferenceStore.from_pairs(users, items, d.n_users, d.n_items)
    elif model == "degree_preserving":
        new, done = double_edge_swap(prefs, swaps_per_like * prefs.n_likes, gen)
        log.debug("accepted %d of %d swaps", done, swaps_per_like * prefs.n_likes)
    else:
        raise ValueError(f"unknown item null model {model!r}")
    return d.with_prefs(new)


def randomize_friends(d: Dataset, seed: int = 0) -> Dataset:
    """Same likes, each core user's friends redrawn uniformly from all other users.

    Friend counts are kept unless fewer candidates exist, in which case the
    core user gets every other user.
    """
    neighbors = {}
    short = 0
    for u in d.graph.core_users:
        u = int(u)
        size = len(d.graph.neighbors[u])
        pool = d.n_users - 1
        if size > pool:
            short += 1
            size = pool
        gen = _rng.rng(seed, "randomize-friends", u)
        draw = gen.choice(pool, size=size, replace=False)
        draw[draw >= u] += 1
        neighbors[u] = np.sort(draw)
    if short:
        log.warning("friend rewiring: %d core users had fewer candidates than friends", short)
    return d.with_graph(SocialGraph(d.graph.core_users, neighbors))


def null_dataset(d: Dataset, null: str, seed: int) -> Dataset:
    if null == "item_uniform":
        return randomize_items(d, "uniform", seed)
    if null == "item_degree_preserving":
        return randomize_items(d, "degree_preserving", seed)
    if null == "friend_rewire":
        return randomize_friends(d, seed)
    raise ValueError(f"unknown null model {null!r}; expected one of {NULL_MODELS}")


def _replicate_ratio(shared: tuple[Dataset, np.ndarray, str], task: tuple[int, int]) -> float:
    d, real, null = shared
    seed, r = task
    randomized = item_ego_counts(null_dataset(d, null, _rng.sub_seed(seed, "replicate", null, r)))
    keep = real > 0
    return float(np.mean(randomized[keep] / real[keep]))


def coverage_ratios(d: Dataset, null: str, replicates: int = 10, seed: int = 0, workers: int = 1) -> np.ndarray:
    """Per-replicate mean over items of (randomized ego count / real ego count).

    Only items covered by at least one real ego network enter the mean.
    """
    if null not in NULL_MODELS:
        raise ValueError(f"unknown null model {null!r}; expected one of {NULL_MODELS}")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    real = item_ego_counts(d)
    if not (real > 0).any():
        raise ValueError("no item is covered by any ego network")
    excluded = int(((d.prefs.item_degrees > 0) & (real == 0)).sum())
    if excluded:
        log.info("%d liked items lie outside every ego network and are left out", excluded)
    tasks = [(seed, r) for r in range(replicates)]
    return np.array(pmap(_replicate_ratio, (d, real, null), tasks, workers))


def coverage_ratio(d: Dataset, null: str, replicates: int = 10, seed: int = 0, workers: int = 1) -> float:
    return float(np.mean(coverage_ratios(d, null, replicates, seed, workers)))


@dataclass(frozen=True)
class LocalityReport:
    friends_similarity: float
    random_similarity: float
    ego_sparsity: float
    network_sparsity: float
    uncovered_ego: float
    random_item_ego: float
    random_friend_ego: float
    null_model: str
    replicates: int
    item_ego_replicates: tuple[float, ...] = field(default=(), repr=False)
    friend_ego_replicates: tuple[float, ...] = field(default=(), repr=False)
    items_outside_egos: int = 0


def locality_report(
    d: Dataset,
    item_null: str = "item_degree_preserving",
    replicates: int = 10,
    seed: int = 0,
    similarity_repeats: int = 10,
    workers: int = 1,
) -> LocalityReport:
    if item_null not in ("item_uniform", "item_degree_preserving"):
        raise ValueError(f"item null model must be item_uniform or item_degree_preserving, got {item_null!r}")
    friends_sim, random_sim = friend_vs_random_similarity(d, similarity_repeats, seed, workers)
    item_reps = coverage_ratios(d, item_null, replicates, seed, workers)
    friend_reps = coverage_ratios(d, "friend_rewire", replicates, seed, workers)
    real = item_ego_counts(d)
    return LocalityReport(
        friends_similarity=friends_sim,
        random_similarity=random_sim,
        ego_sparsity=ego_sparsity(d),
        network_sparsity=network_sparsity(d),
        uncovered_ego=uncovered_ego(d),
        random_item_ego=float(item_reps.mean()),
        random_friend_ego=float(friend_reps.mean()),
        null_model=item_null,
        replicates=replicates,
        item_ego_replicates=tuple(float(x) for x in item_reps),
        friend_ego_replicates=tuple(float(x) for x in friend_reps),
        items_outside_egos=int(((d.prefs.item_degrees > 0) & (real == 0)).sum()),
    )


def degree_sequences(d: Dataset) -> dict[str, np.ndarray]:
    """User, item and core-friend degree arrays (for null-model checks)."""
    return {
        "user": d.prefs.user_degrees.copy(),
        "item": d.prefs.item_degrees.copy(),
        "friends": d.graph.friend_counts(),
    }

