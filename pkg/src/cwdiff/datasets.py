"""Synthetic dataset generators and the on-disk dataset format.

The three generators reproduce the controlled heterophilic settings used by
the experiments: a cycle with same-class nodes at opposite positions, a ring
of stochastic-block clusters with opposite clusters sharing a class, and an
overlapping-Gaussian bipartite cycle. Node features are class-conditional
Gaussians with per-seed random means, so generated datasets are bitwise
deterministic per seed.

A dataset directory holds ``graph.edges``, ``features.csv``, ``labels.labels``
and ``splits.json`` in the formats documented in fileio.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DatasetError
from .fileio import read_edges, read_features_csv, read_labels, read_splits_json
from .graphs import Graph


@dataclass(frozen=True)
class Split:
    """Boolean node masks; pairwise disjoint."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    @classmethod
    def from_index_lists(cls, n, train, val, test):
        masks = []
        for name, idx in (("train", train), ("val", val), ("test", test)):
            idx = np.asarray(idx, dtype=np.int64)
            if len(idx) and (idx.min() < 0 or idx.max() >= n):
                raise DatasetError(f"{name} indices out of range")
            mask = np.zeros(n, dtype=bool)
            mask[idx] = True
            masks.append(mask)
        return cls(*masks)

    @classmethod
    def all_train(cls, n):
        return cls(np.ones(n, dtype=bool), np.zeros(n, dtype=bool), np.zeros(n, dtype=bool))


@dataclass(frozen=True)
class Dataset:
    graph: Graph
    raw_features: np.ndarray
    labels: np.ndarray
    splits: list

    def __post_init__(self):
        n = self.graph.n
        if self.raw_features.shape[0] != n or self.labels.shape != (n,):
            raise DatasetError("features/labels do not match the graph size")
        classes = int(self.labels.max()) + 1
        if np.bincount(self.labels, minlength=classes).min() == 0:
            raise DatasetError("labels skip a class index")
        for k, split in enumerate(self.splits):
            overlap = (
                (split.train & split.val) | (split.train & split.test) | (split.val & split.test)
            )
            if overlap.any():
                raise DatasetError(f"split {k}: masks overlap at nodes {np.flatnonzero(overlap).tolist()}")
            present = np.bincount(self.labels[split.train], minlength=classes)
            if (present == 0).any():
                missing = np.flatnonzero(present == 0).tolist()
                raise DatasetError(f"split {k}: classes {missing} absent from the train mask")

    @property
    def num_classes(self):
        return int(self.labels.max()) + 1

    @property
    def feature_dim(self):
        return self.raw_features.shape[1]


def _class_gaussian_features(rng, labels, num_classes, feature_dim, feature_std):
    """Per-class Gaussian features: means ~ N(0, I), shared isotropic std."""
    means = rng.standard_normal((num_classes, feature_dim))
    noise = rng.standard_normal((len(labels), feature_dim)) * feature_std
    return means[labels] + noise


def gen_cycle_opposite(classes, feature_dim=8, feature_std=1.0, seed=0) -> Dataset:
    """Cycle with two nodes per class sitting at opposite positions.

    Node i of the 2C-cycle gets class i mod C, so same-class nodes are C hops
    apart: maximal heterophily for a cycle.
    """
    if classes < 2:
        raise DatasetError("cycle construction needs at least 2 classes")
    n = 2 * classes
    graph = Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])
    labels = np.arange(n, dtype=np.int64) % classes
    rng = np.random.default_rng([seed, 0])
    feats = _class_gaussian_features(rng, labels, classes, feature_dim, feature_std)
    return Dataset(graph=graph, raw_features=feats, labels=labels, splits=[Split.all_train(n)])


def gen_sbm_ring(classes, nodes_per_cluster=10, inter_p=0.5, feature_dim=8,
                 feature_std=1.0, seed=0, max_resamples=100) -> Dataset:
    """Ring of 2C clusters, edges only between adjacent clusters.

    Cluster r carries class r mod C (opposite clusters share a class); no
    intra-cluster edges. Bernoulli(inter_p) cross edges, resampled until the
    graph is connected.
    """
    if classes < 2:
        raise DatasetError("ring construction needs at least 2 classes")
    if not 0.0 < inter_p <= 1.0:
        raise DatasetError("inter_p must be in (0, 1]")
    num_clusters = 2 * classes
    k = nodes_per_cluster
    n = num_clusters * k
    labels = (np.arange(n, dtype=np.int64) // k) % classes
    rng = np.random.default_rng([seed, 1])
    graph = None
    for _ in range(max_resamples):
        edges = []
        for r in range(num_clusters):
            s = (r + 1) % num_clusters
            block = rng.random((k, k)) < inter_p
            for a, b in zip(*np.nonzero(block)):
                edges.append((r * k + int(a), s * k + int(b)))
        candidate = Graph.from_edges(n, edges)
        if candidate.is_connected():
            graph = candidate
            break
    if graph is None:
        raise DatasetError(
            f"no connected sample in {max_resamples} draws (inter_p={inter_p})"
        )
    feats = _class_gaussian_features(rng, labels, classes, feature_dim, feature_std)
    return Dataset(graph=graph, raw_features=feats, labels=labels, splits=[Split.all_train(n)])


def gen_bipartite_cycle(n=20, feature_dim=2, overlap_std=1.5, seed=0) -> Dataset:
    """Even cycle with parity classes and strongly overlapping Gaussians.

    Class means sit at -+0.5 along the first feature coordinate with isotropic
    std ``overlap_std``, so the classes are not linearly separable at
    initialization.
    """
    if n % 2:
        raise DatasetError("bipartite cycle needs an even node count")
    graph = Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])
    labels = np.arange(n, dtype=np.int64) % 2
    rng = np.random.default_rng([seed, 2])
    means = np.zeros((2, feature_dim))
    means[0, 0] = 0.5
    means[1, 0] = -0.5
    feats = means[labels] + rng.standard_normal((n, feature_dim)) * overlap_std
    return Dataset(graph=graph, raw_features=feats, labels=labels, splits=[Split.all_train(n)])


def edge_homophily(graph: Graph, labels) -> float:
    """Fraction of edges joining same-class endpoints."""
    if graph.num_edges == 0:
        return 0.0
    labels = np.asarray(labels)
    return float((labels[graph.edge_i] == labels[graph.edge_j]).mean())


def load_dataset(dir_path) -> Dataset:
    """Load ``graph.edges`` + ``features.csv`` + ``labels.labels`` + ``splits.json``."""
    def path(name):
        full = os.path.join(dir_path, name)
        if not os.path.exists(full):
            raise DatasetError(f"missing dataset file: {full}")
        return full

    graph = read_edges(path("graph.edges"))
    features = read_features_csv(path("features.csv"))
    labels = read_labels(path("labels.labels"))
    raw_splits = read_splits_json(path("splits.json"))
    if features.shape[0] != graph.n:
        raise DatasetError(
            f"features.csv has {features.shape[0]} rows for {graph.n} nodes"
        )
    if labels.shape != (graph.n,):
        raise DatasetError(f"labels.labels has {labels.shape[0]} rows for {graph.n} nodes")
    splits = []
    for k, entry in enumerate(raw_splits):
        try:
            splits.append(
                Split.from_index_lists(graph.n, entry["train"], entry["val"], entry["test"])
            )
        except KeyError as exc:
            raise DatasetError(f"split {k} is missing the {exc.args[0]!r} key") from exc
        except DatasetError as exc:
            raise DatasetError(f"split {k}: {exc}") from exc
    return Dataset(graph=graph, raw_features=features, labels=labels, splits=splits)


def save_dataset(dir_path, dataset: Dataset):
    """Write a dataset directory in the documented four-file layout."""
    from .fileio import write_edges, write_features_csv, write_json, write_labels

    os.makedirs(dir_path, exist_ok=True)
    write_edges(os.path.join(dir_path, "graph.edges"), dataset.graph)
    write_features_csv(os.path.join(dir_path, "features.csv"), dataset.raw_features)
    write_labels(os.path.join(dir_path, "labels.labels"), dataset.labels)
    payload = [
        {
            "train": np.flatnonzero(s.train).tolist(),
            "val": np.flatnonzero(s.val).tolist(),
            "test": np.flatnonzero(s.test).tolist(),
        }
        for s in dataset.splits
    ]
    write_json(os.path.join(dir_path, "splits.json"), payload)
