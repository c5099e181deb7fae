from __future__ import annotations

import numpy as np
import pytest

from egorec.dataset import Dataset, generate_synthetic, make_dataset


def random_instance(seed: int, n_users: int = 60, n_items: int = 40, n_core: int = 8,
                    max_friends: int = 10, max_likes: int = 8) -> tuple[Dataset, dict, dict]:
    """Small random dataset plus the raw neighbor/like dicts it was built from.

    Small item universes make Jaccard ties common, which exercises tie rules.
    """
    gen = np.random.default_rng(seed)
    cores = sorted(gen.choice(n_users, size=n_core, replace=False).tolist())
    neighbors = {}
    for u in cores:
        others = [v for v in range(n_users) if v != u]
        size = int(gen.integers(1, max_friends + 1))
        neighbors[u] = set(gen.choice(others, size=size, replace=False).tolist())
    likes = {}
    for u in range(n_users):
        lo = 1 if u in neighbors else 0
        size = int(gen.integers(lo, max_likes + 1))
        if size:
            likes[u] = set(gen.choice(n_items, size=size, replace=False).tolist())
    d = make_dataset(neighbors, likes, n_users=n_users, n_items=n_items)
    return d, neighbors, likes


@pytest.fixture
def minimal_files(tmp_path):
    social = tmp_path / "social.tsv"
    likes = tmp_path / "likes.tsv"
    social.write_text("# core\tneighbor\n1\t2\n1\t3\n", encoding="utf-8")
    likes.write_text("1\tA\n2\tA\n3\tB\n", encoding="utf-8")
    return social, likes


@pytest.fixture(scope="session")
def local_dataset() -> Dataset:
    return generate_synthetic(50, 950, 2000, 20, 0.8, seed=11)
