"""Ego-network vs. full-network k-nn recommendation and preference-locality metrics."""

from egorec.dataset import Dataset, DatasetError, dataset_stats, generate_synthetic, load_dataset, popularity_cdf
from egorec.locality import coverage_ratio, ego_sparsity, item_ego_counts, network_sparsity, uncovered_ego
from egorec.recommender import evaluate, evaluate_many, ndcg, recommend, split_likes
from egorec.similarity import NeighborPoolSpec, jaccard, top_k_neighbors

__version__ = "0.1.0"
