import numpy as np
import pytest

from cwdiff import ComplexWeightedGraph, Graph
from cwdiff.balance import Partition


def er_connected(rng, n, p=0.3, max_tries=1000):
    """Erdos-Renyi graph, rejection-sampled until connected."""
    for _ in range(max_tries):
        mask = rng.random((n, n)) < p
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if mask[i, j]]
        g = Graph.from_edges(n, edges)
        if g.is_connected():
            return g
    raise RuntimeError("could not sample a connected graph")


def random_partition(rng, n, num_classes):
    """Uniform labels with every class guaranteed non-empty."""
    assert num_classes <= n
    labels = rng.integers(0, num_classes, size=n)
    pick = rng.choice(n, size=num_classes, replace=False)
    labels[pick] = np.arange(num_classes)
    return Partition.from_labels(labels, num_classes=num_classes)


def random_weighted_graph(rng, n, p=0.4, zero_free=True):
    """Connected graph with random complex weights (unit-free magnitudes)."""
    g = er_connected(rng, n, p)
    m = g.num_edges
    mags = rng.uniform(0.2, 2.0, size=m) if zero_free else rng.uniform(0.0, 2.0, size=m)
    phases = rng.uniform(0.0, 2 * np.pi, size=m)
    w = mags * np.exp(1j * phases)
    return ComplexWeightedGraph.from_edges(
        g.n, list(zip(g.edge_i.tolist(), g.edge_j.tolist())), w.tolist()
    )


def cycle_graph(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
