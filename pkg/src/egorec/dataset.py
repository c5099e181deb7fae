"""Ego-centric social graphs and unary preference data.

A dataset is a set of *core users* whose first-degree neighbor sets are
complete, plus a bipartite user-item "likes" relation covering core users,
their friends and anyone else who liked something. Users and items carry
dense integer ids assigned in first-appearance order; the original string
labels are kept alongside.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from egorec import _rng

log = logging.getLogger(__name__)


class DatasetError(ValueError):
    """Malformed input files or a dataset violating its invariants."""


@dataclass(frozen=True)
class SocialGraph:
    """Directed core -> neighbor edges.

    ``core_users`` is sorted; every core user maps to a sorted, non-empty
    array of neighbor ids that never contains the core user itself.
    """

    core_users: np.ndarray
    neighbors: Mapping[int, np.ndarray]

    def __post_init__(self) -> None:
        for u in self.core_users:
            nbrs = self.neighbors.get(int(u))
            if nbrs is None or len(nbrs) == 0:
                raise DatasetError(f"core user {int(u)} has zero neighbors")
            if np.any(nbrs == u):
                raise DatasetError(f"core user {int(u)} is in its own neighbor set")

    @property
    def n_core(self) -> int:
        return len(self.core_users)

    def friends(self, u: int) -> np.ndarray:
        try:
            return self.neighbors[int(u)]
        except KeyError:
            raise KeyError(f"user {u} is not a core user") from None

    def ego_members(self, u: int) -> np.ndarray:
        """Core user plus friends, sorted."""
        return np.union1d(self.friends(u), [u])

    def friend_counts(self) -> np.ndarray:
        return np.array([len(self.neighbors[int(u)]) for u in self.core_users], dtype=np.int64)

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in self.core_users:
            for v in self.neighbors[int(u)]:
                yield int(u), int(v)


@dataclass(frozen=True)
class PreferenceStore:
    """Unary likes as a users x items 0/1 CSR matrix.

    The CSR rows give the per-user index; the CSC copy gives the per-item
    index. Both are built from the same matrix, so they are exact transposes.
    """

    matrix: sp.csr_matrix

    @classmethod
    def from_pairs(
        cls,
        users: Sequence[int] | np.ndarray,
        items: Sequence[int] | np.ndarray,
        n_users: int,
        n_items: int,
    ) -> PreferenceStore:
        users = np.asarray(users, dtype=np.int64)
        items = np.asarray(items, dtype=np.int64)
        if len(users):
            key = np.unique(users * n_items + items)
            users, items = np.divmod(key, n_items)
        data = np.ones(len(users), dtype=np.int32)
        m = sp.csr_matrix((data, (users, items)), shape=(n_users, n_items))
        m.sort_indices()
        return cls(m)

    @property
    def n_users(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_items(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_likes(self) -> int:
        return int(self.matrix.nnz)

    @cached_property
    def by_item_matrix(self) -> sp.csc_matrix:
        m = self.matrix.tocsc()
        m.sort_indices()
        return m

    @cached_property
    def user_degrees(self) -> np.ndarray:
        return np.diff(self.matrix.indptr).astype(np.int64)

    @cached_property
    def item_degrees(self) -> np.ndarray:
        return np.diff(self.by_item_matrix.indptr).astype(np.int64)

    def items_of(self, u: int) -> np.ndarray:
        m = self.matrix
        return m.indices[m.indptr[u] : m.indptr[u + 1]]

    def users_of(self, i: int) -> np.ndarray:
        m = self.by_item_matrix
        return m.indices[m.indptr[i] : m.indptr[i + 1]]

    def by_user(self) -> dict[int, frozenset[int]]:
        return {u: frozenset(self.items_of(u).tolist()) for u in range(self.n_users) if self.user_degrees[u]}

    def by_item(self) -> dict[int, frozenset[int]]:
        return {i: frozenset(self.users_of(i).tolist()) for i in range(self.n_items) if self.item_degrees[i]}

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """(users, items) arrays in user-major order."""
        users = np.repeat(np.arange(self.n_users, dtype=np.int64), self.user_degrees)
        return users, self.matrix.indices.astype(np.int64)


@dataclass(frozen=True)
class LoadReport:
    duplicate_edges: int = 0
    self_loops: int = 0
    duplicate_likes: int = 0
    dropped_core_users: int = 0


@dataclass(frozen=True)
class Dataset:
    graph: SocialGraph
    prefs: PreferenceStore
    user_labels: tuple[str, ...] = ()
    item_labels: tuple[str, ...] = ()
    report: LoadReport = field(default_factory=LoadReport)

    def __post_init__(self) -> None:
        if self.graph.n_core == 0:
            raise DatasetError("dataset has no core users")
        n = self.prefs.n_users
        degrees = self.prefs.user_degrees
        for u in self.graph.core_users:
            if not 0 <= u < n:
                raise DatasetError(f"core user {int(u)} outside user range [0, {n})")
            if degrees[u] == 0:
                raise DatasetError(f"core user {int(u)} has zero likes")
            nbrs = self.graph.neighbors[int(u)]
            if nbrs.min() < 0 or nbrs.max() >= n:
                raise DatasetError(f"neighbor of core user {int(u)} outside user range")

    @property
    def n_users(self) -> int:
        return self.prefs.n_users

    @property
    def n_items(self) -> int:
        return self.prefs.n_items

    @cached_property
    def likers(self) -> np.ndarray:
        """Sorted ids of users with at least one like."""
        return np.flatnonzero(self.prefs.user_degrees > 0)

    @cached_property
    def _core_set(self) -> frozenset[int]:
        return frozenset(int(u) for u in self.graph.core_users)

    def is_core(self, u: int) -> bool:
        return int(u) in self._core_set

    def friends(self, u: int) -> np.ndarray:
        return self.graph.friends(u)

    def non_friends(self, u: int) -> np.ndarray:
        """Users with likes outside the ego network of ``u``."""
        ego = self.graph.ego_members(u)
        return np.setdiff1d(self.likers, ego, assume_unique=True)

    def full_network(self, u: int) -> np.ndarray:
        return np.union1d(self.friends(u), self.non_friends(u))

    def label_of_user(self, u: int) -> str:
        return self.user_labels[u] if self.user_labels else str(u)

    def label_of_item(self, i: int) -> str:
        return self.item_labels[i] if self.item_labels else str(i)

    def with_prefs(self, prefs: PreferenceStore) -> Dataset:
        return replace(self, prefs=prefs)

    def with_graph(self, graph: SocialGraph) -> Dataset:
        return replace(self, graph=graph)


def make_graph(neighbors: Mapping[int, Iterable[int]]) -> SocialGraph:
    nbrs = {int(u): np.unique(np.fromiter(vs, dtype=np.int64)) for u, vs in neighbors.items()}
    return SocialGraph(np.array(sorted(nbrs), dtype=np.int64), nbrs)


def make_dataset(
    neighbors: Mapping[int, Iterable[int]],
    likes: Mapping[int, Iterable[int]],
    n_users: int | None = None,
    n_items: int | None = None,
) -> Dataset:
    """Build a dataset straight from integer ids (tests, generators)."""
    users: list[int] = []
    items: list[int] = []
    for u, its in likes.items():
        for i in its:
            users.append(int(u))
            items.append(int(i))
    max_user = max([*users, *neighbors, *(v for vs in neighbors.values() for v in vs)], default=-1)
    n_users = max_user + 1 if n_users is None else n_users
    n_items = max(items, default=-1) + 1 if n_items is None else n_items
    return Dataset(make_graph(neighbors), PreferenceStore.from_pairs(users, items, n_users, n_items))


# -- file IO ---------------------------------------------------------------


def _read_pairs(path: Path) -> Iterator[tuple[int, str, str]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not all(p.strip() and not any(c.isspace() for c in p.strip()) for p in parts):
                raise DatasetError(f"{path}:{lineno}: expected '<id>\\t<id>', got {raw.rstrip()!r}")
            yield lineno, parts[0].strip(), parts[1].strip()


def load_dataset(social_path: str | Path, likes_path: str | Path) -> Dataset:
    """Read a social edge file and a likes file (both ``a<TAB>b`` per line).

    Core users are exactly the ids in column 1 of the social file. Core users
    without likes are dropped from the core set (they stay ordinary users).
    """
    social_path, likes_path = Path(social_path), Path(likes_path)
    user_ids: dict[str, int] = {}
    item_ids: dict[str, int] = {}

    def uid(label: str) -> int:
        return user_ids.setdefault(label, len(user_ids))

    neighbors: dict[int, set[int]] = {}
    dup_edges = self_loops = 0
    for _, a, b in _read_pairs(social_path):
        u, v = uid(a), uid(b)
        nbrs = neighbors.setdefault(u, set())
        if u == v:
            self_loops += 1
        elif v in nbrs:
            dup_edges += 1
        else:
            nbrs.add(v)
    for u, nbrs in neighbors.items():
        if not nbrs:
            raise DatasetError(f"{social_path}: core user {list(user_ids)[u]!r} has zero neighbors")

    seen: set[tuple[int, int]] = set()
    users: list[int] = []
    items: list[int] = []
    dup_likes = 0
    for _, a, b in _read_pairs(likes_path):
        pair = (uid(a), item_ids.setdefault(b, len(item_ids)))
        if pair in seen:
            dup_likes += 1
            continue
        seen.add(pair)
        users.append(pair[0])
        items.append(pair[1])

    prefs = PreferenceStore.from_pairs(users, items, len(user_ids), len(item_ids))
    degrees = prefs.user_degrees
    kept = {u: vs for u, vs in neighbors.items() if degrees[u] > 0}
    dropped = len(neighbors) - len(kept)
    if not kept:
        raise DatasetError("core user has zero likes: all core users dropped")
    for name, count in (("duplicate edge lines", dup_edges), ("self-loop edge lines", self_loops),
                        ("duplicate like lines", dup_likes), ("core users without likes dropped", dropped)):
        if count:
            log.warning("%s: %d", name, count)

    labels = tuple(user_ids)
    return Dataset(
        make_graph(kept),
        prefs,
        user_labels=labels,
        item_labels=tuple(item_ids),
        report=LoadReport(dup_edges, self_loops, dup_likes, dropped),
    )


def write_dataset(d: Dataset, social_path: str | Path, likes_path: str | Path) -> None:
    with open(social_path, "w", encoding="utf-8") as fh:
        for u, v in d.graph.edges():
            fh.write(f"{d.label_of_user(u)}\t{d.label_of_user(v)}\n")
    users, items = d.prefs.pairs()
    with open(likes_path, "w", encoding="utf-8") as fh:
        for u, i in zip(users.tolist(), items.tolist()):
            fh.write(f"{d.label_of_user(u)}\t{d.label_of_item(i)}\n")


# -- summaries -------------------------------------------------------------


@dataclass(frozen=True)
class DatasetStats:
    """Dataset overview; (mean, std) pairs use the population std."""

    total_users: int
    total_core_users: int
    total_items: int
    total_likes: int
    friends_per_user: tuple[float, float]
    likes_per_user: tuple[float, float]
    likes_per_item: tuple[float, float]

    def as_dict(self) -> dict[str, float | int]:
        flat: dict[str, float | int] = {}
        for key, value in asdict(self).items():
            if isinstance(value, tuple):
                flat[f"{key}_mean"], flat[f"{key}_std"] = value
            else:
                flat[key] = value
        return flat


def _mean_std(x: np.ndarray) -> tuple[float, float]:
    if len(x) == 0:
        return 0.0, 0.0
    return float(np.mean(x)), float(np.std(x))


def dataset_stats(d: Dataset) -> DatasetStats:
    item_deg = d.prefs.item_degrees
    liked = item_deg[item_deg > 0]
    return DatasetStats(
        total_users=d.n_users,
        total_core_users=d.graph.n_core,
        total_items=len(liked),
        total_likes=d.prefs.n_likes,
        friends_per_user=_mean_std(d.graph.friend_counts()),
        likes_per_user=_mean_std(d.prefs.user_degrees),
        likes_per_item=_mean_std(liked),
    )


def popularity_cdf(d: Dataset, grid: Iterable[float]) -> list[tuple[float, float]]:
    """Share of all likes held by the top p% most-liked items, for p in grid.

    The top p% is ``ceil(p/100 * n_items)`` items, counting items with at
    least one like.
    """
    grid = list(grid)
    if not grid:
        return []
    counts = np.sort(d.prefs.item_degrees[d.prefs.item_degrees > 0])[::-1]
    if len(counts) == 0:
        raise DatasetError("popularity_cdf needs at least one like")
    cum = np.concatenate([[0], np.cumsum(counts)])
    total, n = cum[-1], len(counts)
    out = []
    for p in grid:
        if not 0 <= p <= 100:
            raise ValueError(f"percentile {p} outside [0, 100]")
        top = min(n, math.ceil(round(p * n / 100, 9)))
        out.append((float(p), float(cum[top] / total)))
    return out


# -- synthetic data --------------------------------------------------------


def generate_synthetic(
    n_core: int,
    n_fringe: int,
    n_items: int,
    likes_per_user: int,
    alpha: float,
    seed: int,
    friends_per_core: int = 50,
) -> Dataset:
    """Random ego networks with planted preference locality.

    Core users are ids ``0..n_core-1`` and each gets ``friends_per_core``
    friends drawn from the fringe ids. Likes are then handed out one round
    at a time (every user gets one like per round, users visited in a fresh
    random order each round): with probability ``alpha`` the user copies a
    random existing like of a random friend, otherwise it likes a uniformly
    random item. Friendship is read symmetrically while generating, so
    fringe users copy from the cores that list them. A copy that would
    duplicate an existing like is retried a few times and then replaced by a
    uniform draw, so every user ends with exactly ``likes_per_user`` likes.
    """
    if min(n_core, n_fringe, n_items, likes_per_user, friends_per_core) <= 0:
        raise ValueError("all counts must be positive")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if likes_per_user > n_items:
        raise ValueError(f"likes_per_user={likes_per_user} exceeds n_items={n_items}")
    friends_per_core = min(friends_per_core, n_fringe)

    gen = _rng.rng(seed, "synth-graph")
    n_users = n_core + n_fringe
    neighbors = {
        u: np.sort(n_core + gen.choice(n_fringe, size=friends_per_core, replace=False))
        for u in range(n_core)
    }
    adj: list[list[int]] = [[] for _ in range(n_users)]
    for u, nbrs in neighbors.items():
        for v in nbrs.tolist():
            adj[u].append(v)
            adj[v].append(u)

    r = _rng.py_rng(seed, "synth-likes")
    liked: list[set[int]] = [set() for _ in range(n_users)]
    ordered: list[list[int]] = [[] for _ in range(n_users)]
    order = list(range(n_users))
    for _ in range(likes_per_user):
        r.shuffle(order)
        for u in order:
            mine = liked[u]
            item = -1
            friends = adj[u]
            if friends and r.random() < alpha:
                for _attempt in range(8):
                    src = ordered[friends[r.randrange(len(friends))]]
                    if src:
                        cand = src[r.randrange(len(src))]
                        if cand not in mine:
                            item = cand
                            break
            while item < 0 or item in mine:
                item = r.randrange(n_items)
            mine.add(item)
            ordered[u].append(item)

    users = np.repeat(np.arange(n_users), likes_per_user)
    items = np.array([i for u in range(n_users) for i in ordered[u]], dtype=np.int64)
    prefs = PreferenceStore.from_pairs(users, items, n_users, n_items)
    return Dataset(
        make_graph(neighbors),
        prefs,
        user_labels=tuple(f"u{u}" for u in range(n_users)),
        item_labels=tuple(f"i{i}" for i in range(n_items)),
    )
