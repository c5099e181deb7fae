"""``egorec`` command line: stats, similarity, evaluate, locality, synth.

Reports go to ``--out`` (default stdout) as comma-separated records with a
header row, or as an aligned table with ``--format table``. A one-line
summary goes to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from collections.abc import Sequence
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from egorec import locality
from egorec.dataset import DatasetError, dataset_stats, generate_synthetic, load_dataset, popularity_cdf, write_dataset
from egorec.recommender import DEFAULT_K_SWEEP, evaluate_many
from egorec.similarity import NeighborPoolSpec, friend_vs_random_similarity, similarity_curve

log = logging.getLogger("egorec")

COMMANDS = ("stats", "similarity", "evaluate", "locality", "synth")
POOLS = {
    "friends": NeighborPoolSpec("friends"),
    "non-friends": NeighborPoolSpec("non_friends"),
    "full": NeighborPoolSpec("full_network"),
    "random": NeighborPoolSpec("random_k", "full_network"),
    "random-friends": NeighborPoolSpec("random_k", "friends"),
    "random-non-friends": NeighborPoolSpec("random_k", "non_friends"),
}
ITEM_NULLS = {"uniform": "item_uniform", "degree-preserving": "item_degree_preserving"}
NULL_CHOICES = (*ITEM_NULLS, "friend-rewire")


@dataclass
class RunConfig:
    command: str
    social_path: Path | None = None
    likes_path: Path | None = None
    seed: int = 0
    output_path: Path | None = None
    output_format: str = "records"
    workers: int = 1
    timestamp: bool = False
    # evaluate
    pools: list[str] = field(default_factory=lambda: ["friends", "non-friends", "full"])
    k_values: list[int] = field(default_factory=lambda: list(DEFAULT_K_SWEEP))
    n_splits: int = 10
    ratio: float = 0.7
    list_len: int = 10
    # similarity / locality
    repeats: int = 10
    null_models: list[str] = field(default_factory=lambda: ["degree-preserving"])
    replicates: int = 10
    # stats
    cdf_grid: list[float] = field(default_factory=list)
    # synth
    cores: int = 100
    fringe: int = 900
    items: int = 2000
    likes_per_user: int = 20
    friends: int = 50
    alpha: float = 0.8

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"--ratio must be in (0, 1), got {self.ratio}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"--alpha must be in [0, 1], got {self.alpha}")
        if self.seed < 0:
            raise ValueError("--seed must be non-negative")
        positive = {
            "--workers": self.workers, "--splits": self.n_splits, "--list-len": self.list_len,
            "--repeats": self.repeats, "--replicates": self.replicates, "--cores": self.cores,
            "--fringe": self.fringe, "--items": self.items, "--likes-per-user": self.likes_per_user,
            "--friends": self.friends,
        }
        for flag, value in positive.items():
            if value < 1:
                raise ValueError(f"{flag} must be positive, got {value}")
        if not self.k_values or min(self.k_values) < 1:
            raise ValueError("--k values must be positive")
        for p in self.pools:
            if p not in POOLS:
                raise ValueError(f"unknown pool {p!r}; choose from {', '.join(POOLS)}")
        for n in self.null_models:
            if n not in NULL_CHOICES:
                raise ValueError(f"unknown null model {n!r}; choose from {', '.join(NULL_CHOICES)}")
        if self.output_format not in ("records", "table"):
            raise ValueError(f"unknown format {self.output_format!r}")
        if self.social_path is None or self.likes_path is None:
            raise ValueError("--social and --likes are required")
        if self.command != "synth":
            for path in (self.social_path, self.likes_path):
                if not path.is_file():
                    raise FileNotFoundError(f"{path}: no such file")


# -- report formatting -----------------------------------------------------


def _cell(value: object) -> str:
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def render(header: Sequence[str], rows: Sequence[Sequence[object]], fmt: str) -> str:
    cells = [[_cell(v) for v in row] for row in rows]
    if fmt == "table":
        widths = [max(len(h), *(len(r[c]) for r in cells)) for c, h in enumerate(header)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
        lines.append("  ".join("-" * w for w in widths))
        lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in cells]
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(cells)
    return buf.getvalue()


# -- commands --------------------------------------------------------------


def _stats(cfg: RunConfig) -> tuple[list[str], list[list[object]]]:
    d = load_dataset(cfg.social_path, cfg.likes_path)
    rows: list[list[object]] = [[k, v] for k, v in dataset_stats(d).as_dict().items()]
    for p, share in popularity_cdf(d, cfg.cdf_grid):
        rows.append([f"popularity_cdf_p{_cell(p)}", share])
    report = d.report
    rows += [
        ["duplicate_edge_lines", report.duplicate_edges],
        ["duplicate_like_lines", report.duplicate_likes],
        ["dropped_core_users", report.dropped_core_users],
    ]
    return ["statistic", "value"], rows


def _similarity(cfg: RunConfig) -> tuple[list[str], list[list[object]]]:
    d = load_dataset(cfg.social_path, cfg.likes_path)
    rows: list[list[object]] = []
    for kind in ("friends", "non_friends"):
        for k, v in similarity_curve(d, cfg.k_values, kind, cfg.workers).items():
            rows.append([f"topk_{kind}", k, v])
    friends_avg, random_avg = friend_vs_random_similarity(d, cfg.repeats, cfg.seed, cfg.workers)
    rows += [["friends_similarity", "all", friends_avg], ["random_similarity", "all", random_avg]]
    return ["metric", "k", "value"], rows


def _evaluate(cfg: RunConfig) -> tuple[list[str], list[list[object]]]:
    d = load_dataset(cfg.social_path, cfg.likes_path)
    conditions = [POOLS[p] for p in dict.fromkeys(cfg.pools)]
    results = evaluate_many(
        d, conditions, sorted(set(cfg.k_values)), cfg.list_len, cfg.n_splits, cfg.ratio, cfg.seed, cfg.workers
    )
    rows: list[list[object]] = []
    for r in results:
        for s, (m, sd) in enumerate(zip(r.split_means, r.split_stds)):
            rows.append([r.condition, r.k, s, r.n_users, r.n_skipped, m, sd])
        rows.append([r.condition, r.k, "aggregate", r.n_users, r.n_skipped, r.mean_ndcg, r.std_ndcg])
    return ["condition", "k", "split", "n_users", "n_skipped", "mean_ndcg", "std_ndcg"], rows


def _locality(cfg: RunConfig) -> tuple[list[str], list[list[object]]]:
    d = load_dataset(cfg.social_path, cfg.likes_path)
    item_nulls = [ITEM_NULLS[n] for n in dict.fromkeys(cfg.null_models) if n in ITEM_NULLS]
    if not item_nulls:
        item_nulls = ["item_degree_preserving"]
    friends_avg, random_avg = friend_vs_random_similarity(d, cfg.repeats, cfg.seed, cfg.workers)
    rows: list[list[object]] = [
        ["friends_similarity", "none", "aggregate", friends_avg],
        ["random_similarity", "none", "aggregate", random_avg],
        ["ego_sparsity_pct", "none", "aggregate", locality.ego_sparsity(d)],
        ["network_sparsity_pct", "none", "aggregate", locality.network_sparsity(d)],
        ["uncovered_ego_pct", "none", "aggregate", locality.uncovered_ego(d)],
    ]
    runs = [("random_item_ego", n) for n in item_nulls] + [("random_friend_ego", "friend_rewire")]
    for metric, null in runs:
        reps = locality.coverage_ratios(d, null, cfg.replicates, cfg.seed, cfg.workers)
        rows += [[metric, null, r, v] for r, v in enumerate(reps.tolist())]
        rows.append([metric, null, "aggregate", float(reps.mean())])
    return ["metric", "null_model", "replicate", "value"], rows


def _synth(cfg: RunConfig) -> tuple[list[str], list[list[object]]]:
    d = generate_synthetic(cfg.cores, cfg.fringe, cfg.items, cfg.likes_per_user, cfg.alpha, cfg.seed, cfg.friends)
    write_dataset(d, cfg.social_path, cfg.likes_path)
    return ["statistic", "value"], [[k, v] for k, v in dataset_stats(d).as_dict().items()]


HANDLERS = {"stats": _stats, "similarity": _similarity, "evaluate": _evaluate, "locality": _locality, "synth": _synth}


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        cfg.validate()
        header, rows = HANDLERS[cfg.command](cfg)
    except (DatasetError, ValueError, KeyError, OSError) as exc:
        print(f"egorec {cfg.command}: error: {exc}", file=sys.stderr)
        return 1
    text = render(header, rows, cfg.output_format)
    if cfg.timestamp:
        text = f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n" + text
    if cfg.output_path is None:
        sys.stdout.write(text)
        where = "stdout"
    else:
        cfg.output_path.write_text(text, encoding="utf-8")
        where = str(cfg.output_path)
    print(f"egorec {cfg.command}: {len(rows)} records -> {where}", file=sys.stderr)
    return 0


# -- argument parsing ------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--social", type=Path, required=True, help="social edge file (core<TAB>neighbor)")
    shared.add_argument("--likes", type=Path, required=True, help="likes file (user<TAB>item)")
    shared.add_argument("--seed", type=int, default=0)
    shared.add_argument("--out", type=Path, default=None, help="report path (default stdout)")
    shared.add_argument("--format", choices=("records", "table"), default="records")
    shared.add_argument("--workers", type=int, default=1)
    shared.add_argument("--timestamp", action="store_true", help="prepend a '# generated' header line")
    shared.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="egorec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[shared], help="dataset overview")
    p.add_argument("--cdf", type=_float_list, default=[], help="popularity CDF percentiles, e.g. 1,5,10,50,100")

    p = sub.add_parser("similarity", parents=[shared], help="top-k and friend-vs-random Jaccard similarity")
    p.add_argument("--k", type=_int_list, default=[1, 5, 10, 20, 30, 40, 50])
    p.add_argument("--repeats", type=int, default=10, help="random non-friend resamples")

    p = sub.add_parser("evaluate", parents=[shared], help="k-nn NDCG per neighbor pool")
    p.add_argument("--pool", type=_str_list, default=["friends", "non-friends", "full"],
                   help=f"comma list from: {', '.join(POOLS)}")
    p.add_argument("--k", type=_int_list, default=list(DEFAULT_K_SWEEP))
    p.add_argument("--splits", type=int, default=10)
    p.add_argument("--ratio", type=float, default=0.7, help="train fraction")
    p.add_argument("--list-len", type=int, default=10)

    p = sub.add_parser("locality", parents=[shared], help="similarity, sparsity and ego coverage metrics")
    p.add_argument("--null", type=_str_list, default=["degree-preserving"],
                   help="item null model(s): uniform, degree-preserving; friend rewiring always runs")
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--repeats", type=int, default=10, help="random non-friend resamples")

    p = sub.add_parser("synth", parents=[shared], help="write a synthetic dataset to --social/--likes")
    p.add_argument("--cores", type=int, default=100)
    p.add_argument("--fringe", type=int, default=900)
    p.add_argument("--items", type=int, default=2000)
    p.add_argument("--likes-per-user", type=int, default=20)
    p.add_argument("--friends", type=int, default=50, help="friends per core user")
    p.add_argument("--alpha", type=float, default=0.8, help="probability a like is copied from a friend")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        command=args.command,
        social_path=args.social,
        likes_path=args.likes,
        seed=args.seed,
        output_path=args.out,
        output_format=args.format,
        workers=args.workers,
        timestamp=args.timestamp,
    )
    for attr, name in (("k_values", "k"), ("n_splits", "splits"), ("ratio", "ratio"), ("list_len", "list_len"),
                       ("pools", "pool"), ("repeats", "repeats"), ("null_models", "null"),
                       ("replicates", "replicates"), ("cdf_grid", "cdf"), ("cores", "cores"),
                       ("fringe", "fringe"), ("items", "items"), ("likes_per_user", "likes_per_user"),
                       ("friends", "friends"), ("alpha", "alpha")):
        if hasattr(args, name):
            setattr(cfg, attr, getattr(args, name))
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
