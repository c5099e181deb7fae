"""Exit criteria for the package, one test per criterion.

Each test prints a ``[PASS]``/``[FAIL]`` line with the measured numbers, then
asserts. Run alone with ``pytest tests/test_acceptance.py``.
"""
import csv
import io
import math
import time
from functools import lru_cache

import numpy as np
import pytest

import oracles
from conftest import random_instance
from egorec import locality as loc
from egorec.cli import main
from egorec.dataset import generate_synthetic
from egorec.recommender import evaluate_many, ndcg, recommend, split_likes
from egorec.similarity import FRIENDS, FULL_NETWORK, NON_FRIENDS, NeighborPoolSpec, jaccard, top_k_neighbors

SEEDS = range(10)
ALPHAS = (0.0, 0.4, 0.8)
# 5k users, 20k items
BIG = dict(n_core=250, n_fringe=4750, n_items=20_000, likes_per_user=20, friends_per_core=50)


@lru_cache(maxsize=None)
def big_dataset(alpha, seed):
    return generate_synthetic(alpha=alpha, seed=seed, **BIG)


@pytest.fixture
def verdict(capsys):
    def report(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
        assert ok, detail
    return report


def test_1_formula_exactness(verdict):
    t0 = time.perf_counter()
    perfect = ndcg(["a", "b", "c"], {"a", "b", "c"})
    zero = ndcg(["x", "y"], {"a", "b", "c"})
    hand = ndcg(["x", "a", "b"], {"a", "b", "c"})
    direct = (1 + 1 / math.log2(3)) / (1 + 1 + 1 / math.log2(3))
    js = jaccard({"A", "B"}, {"B", "C"})
    elapsed = time.perf_counter() - t0
    ok = perfect == 1.0 and zero == 0.0 and abs(hand - direct) <= 1e-9 and js == 1 / 3 and elapsed < 1.0
    verdict(1, ok, f"ndcg perfect={perfect} zero={zero} hand={hand:.10f} (direct {direct:.10f}) "
                   f"jaccard={js!r} in {elapsed * 1e3:.2f} ms")


def test_2_oracle_equivalence(verdict):
    t0 = time.perf_counter()
    checked = mismatches = 0
    for seed in range(10):
        d, neighbors, likes = random_instance(100 + seed, n_users=200, n_items=500, n_core=10,
                                              max_friends=40, max_likes=30)
        for u in d.graph.core_users.tolist():
            # single-like users cannot be split; rank against their full set instead
            train = set(split_likes(d, u, 0.7, seed=seed).train.tolist()) if len(likes[u]) >= 2 else set(likes[u])
            for kind, pool in oracles.pools(neighbors, likes, u).items():
                for k in (1, 10, 50):
                    expected_nbrs = oracles.top_k(likes, pool, likes[u], k)
                    got_nbrs = top_k_neighbors(d, u, NeighborPoolSpec(kind), k)
                    mismatches += [tuple(n) for n in got_nbrs] != [(v, float(s)) for v, s in expected_nbrs]
                    expected = oracles.recommend(likes, oracles.top_k(likes, pool, train, k), train, 10)
                    got = recommend(d, u, sorted(train), NeighborPoolSpec(kind), k)
                    mismatches += got.items != [i for i, _ in expected]
                    mismatches += not np.allclose([s for _, s in got.entries], [float(s) for _, s in expected],
                                                  rtol=0, atol=1e-12)
                    checked += 1
    elapsed = time.perf_counter() - t0
    verdict(2, mismatches == 0 and elapsed < 10,
            f"{checked} (user, pool, k) cases on 10 instances, {mismatches} mismatches, {elapsed:.1f} s")


def test_3_null_model_contracts(verdict):
    t0 = time.perf_counter()
    failures = []
    for seed in SEEDS:
        d = generate_synthetic(50, 950, 2000, 20, 0.8, seed=seed)
        before = loc.degree_sequences(d)
        swapped = loc.degree_sequences(loc.randomize_items(d, "degree_preserving", seed))
        if not (np.array_equal(before["user"], swapped["user"]) and np.array_equal(before["item"], swapped["item"])):
            failures.append(f"degree_preserving seed {seed}")
        rewired = loc.randomize_friends(d, seed)
        same_prefs = (rewired.prefs.matrix != d.prefs.matrix).nnz == 0 and np.array_equal(
            rewired.prefs.matrix.indices, d.prefs.matrix.indices) and np.array_equal(
            rewired.prefs.matrix.indptr, d.prefs.matrix.indptr)
        if not (same_prefs and np.array_equal(rewired.graph.friend_counts(), before["friends"])):
            failures.append(f"friend_rewire seed {seed}")
    elapsed = time.perf_counter() - t0
    verdict(3, not failures and elapsed < 30,
            f"10 seeds x 1k users, failures={failures or 'none'}, {elapsed:.1f} s")


def test_4_null_self_consistency(verdict):
    t0 = time.perf_counter()
    base = generate_synthetic(50, 950, 500, 20, 0.8, seed=4)
    values = {}
    for null in loc.NULL_MODELS:
        generated = loc.null_dataset(base, null, seed=1234)
        values[null] = loc.coverage_ratio(generated, null, replicates=10, seed=7)
    elapsed = time.perf_counter() - t0
    ok = all(abs(v - 1.0) <= 0.05 for v in values.values()) and elapsed < 60
    verdict(4, ok, ", ".join(f"{k}={v:.4f}" for k, v in values.items()) + f" (target 1 +/- 0.05), {elapsed:.1f} s")


def _pooled_split_means(alpha):
    pools = {"friends": [], "non_friends": [], "full_network": []}
    for seed in SEEDS:
        for r in evaluate_many(big_dataset(alpha, seed), [FRIENDS, NON_FRIENDS, FULL_NETWORK], [50],
                               n_splits=10, seed=seed):
            pools[r.condition].extend(r.split_means)
    return {k: np.array(v) for k, v in pools.items()}


@pytest.mark.slow
def test_5_friends_beat_non_friends_under_locality(verdict):
    t0 = time.perf_counter()
    local = _pooled_split_means(0.8)
    null = _pooled_split_means(0.0)
    f, n, full = (local[k].mean() for k in ("friends", "non_friends", "full_network"))
    sd = max(local["friends"].std(), local["non_friends"].std())
    best = max(f, n)
    f0, n0 = null["friends"].mean(), null["non_friends"].mean()
    sd0 = max(null["friends"].std(), null["non_friends"].std())
    elapsed = time.perf_counter() - t0
    ok = (f - n > sd) and abs(full - best) <= 0.15 * best and abs(f0 - n0) <= 2 * sd0 and elapsed < 300
    verdict(5, ok, f"alpha=0.8 friends={f:.4f} non_friends={n:.4f} full={full:.4f} (split-mean sd {sd:.4f}, "
                   f"full/best={full / best:.3f}); alpha=0 gap={f0 - n0:+.5f} vs 2sd={2 * sd0:.5f}; {elapsed:.0f} s")


@pytest.mark.slow
def test_6_locality_monotone_in_alpha(verdict):
    t0 = time.perf_counter()
    series = {"uncovered_ego": [], "item_degree_preserving": [], "friend_rewire": [], "sparsity_ratio": []}
    for alpha in ALPHAS:
        acc = {k: [] for k in series}
        for seed in SEEDS:
            d = big_dataset(alpha, seed)
            acc["uncovered_ego"].append(loc.uncovered_ego(d))
            acc["item_degree_preserving"].append(loc.coverage_ratio(d, "item_degree_preserving", 10, seed))
            acc["friend_rewire"].append(loc.coverage_ratio(d, "friend_rewire", 10, seed))
            acc["sparsity_ratio"].append(loc.ego_sparsity(d) / loc.network_sparsity(d))
        for k in series:
            series[k].append(float(np.mean(acc[k])))
    elapsed = time.perf_counter() - t0
    monotone = {k: all(a <= b for a, b in zip(v, v[1:])) for k, v in series.items()}
    detail = "; ".join(f"{k} {'/'.join(f'{x:.4g}' for x in v)}" for k, v in series.items())
    verdict(6, all(monotone.values()) and elapsed < 300, f"alpha 0/0.4/0.8 -> {detail}; {elapsed:.0f} s")


def _cli_bytes(tmp_path, tag, args):
    out = tmp_path / f"{tag}.out"
    assert main([*args, "--out", str(out)]) == 0
    return out.read_bytes()


def test_7_worker_count_invariance(verdict, tmp_path):
    social, likes = tmp_path / "s.tsv", tmp_path / "l.tsv"
    synth = ["--cores", "40", "--fringe", "560", "--items", "1500", "--friends", "30", "--alpha", "0.8", "--seed", "3"]
    data = ["--social", str(social), "--likes", str(likes), "--seed", "7"]
    commands = {
        "stats": ["stats", *data, "--cdf", "1,10,50,100"],
        "similarity": ["similarity", *data, "--k", "1,10,50"],
        "evaluate": ["evaluate", *data, "--k", "10,50", "--splits", "10",
                     "--pool", "friends,non-friends,full,random"],
        "locality": ["locality", *data, "--null", "uniform,degree-preserving", "--replicates", "5"],
    }
    differing = []
    files = {}
    for workers in ("1", "8"):
        s2, l2 = tmp_path / f"s{workers}.tsv", tmp_path / f"l{workers}.tsv"
        _cli_bytes(tmp_path, f"synth{workers}", ["synth", "--social", str(s2), "--likes", str(l2), *synth,
                                                 "--workers", workers])
        files[workers] = (s2.read_bytes(), l2.read_bytes())
    if files["1"] != files["8"]:
        differing.append("synth")
    social.write_bytes(files["1"][0])
    likes.write_bytes(files["1"][1])
    for name, args in commands.items():
        if _cli_bytes(tmp_path, f"{name}1", [*args, "--workers", "1"]) != _cli_bytes(
                tmp_path, f"{name}8", [*args, "--workers", "8"]):
            differing.append(name)
    verdict(7, not differing, f"commands differing between --workers 1 and 8: {differing or 'none'}")


def test_8_report_schemas(verdict, tmp_path):
    social, likes = tmp_path / "s.tsv", tmp_path / "l.tsv"
    assert main(["synth", "--social", str(social), "--likes", str(likes), "--seed", "2",
                 "--out", str(tmp_path / "synth.csv")]) == 0
    stats = _cli_bytes(tmp_path, "stats", ["stats", "--social", str(social), "--likes", str(likes)]).decode()
    keys = {r["statistic"] for r in csv.DictReader(io.StringIO(stats))}
    overview_keys = {"total_users", "total_core_users", "friends_per_user_mean", "friends_per_user_std", "total_items",
              "total_likes", "likes_per_user_mean", "likes_per_user_std", "likes_per_item_mean", "likes_per_item_std"}
    evals = _cli_bytes(tmp_path, "eval", ["evaluate", "--social", str(social), "--likes", str(likes),
                                          "--k", "50", "--splits", "2"]).decode()
    aggregates = {(r["condition"], r["k"]) for r in csv.DictReader(io.StringIO(evals)) if r["split"] == "aggregate"}
    expected_aggregates = {("friends", "50"), ("non_friends", "50"), ("full_network", "50")}
    ok = overview_keys <= keys and aggregates == expected_aggregates
    verdict(8, ok, f"stats missing={sorted(overview_keys - keys) or 'none'}; evaluate aggregates={sorted(aggregates)}")
