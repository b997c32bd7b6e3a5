"""Structural balance: cycle phases, balance checking, constructive weights,
and the closed-form steady state of the complex random walk.

A complex-weighted graph is structurally balanced when every cycle's
accumulated edge phase is 0 mod 2*pi. Balance is equivalent to the existence
of a node potential phi with phi_j - phi_i = theta_ij on every edge, which is
what the spanning-tree checker verifies. On a balanced, non-bipartite graph
the walk converges to a steady state whose node phases encode the balance
partition, and that steady state has a closed form in terms of the degrees
and one projection coefficient of the initial condition.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import (
    BalanceError,
    ConnectivityError,
    PartitionError,
    PathError,
    PhaseUndefinedError,
    SeparationError,
)
from .graphs import TWO_PI, ComplexWeightedGraph, Graph, complex_degrees, phase_of


@dataclass(frozen=True)
class Partition:
    """Node-to-class assignment with classes 0..num_classes-1, all non-empty."""

    labels: np.ndarray
    num_classes: int

    @classmethod
    def from_labels(cls, labels, num_classes=None):
        arr = np.asarray(labels, dtype=np.int64)
        if arr.ndim != 1:
            raise PartitionError("labels must be one-dimensional")
        if num_classes is None:
            num_classes = int(arr.max()) + 1 if len(arr) else 0
        if num_classes <= 0:
            raise PartitionError("at least one class required")
        if (arr < 0).any() or (arr >= num_classes).any():
            raise PartitionError("label out of range")
        counts = np.bincount(arr, minlength=num_classes)
        empty = np.flatnonzero(counts == 0)
        if len(empty):
            raise PartitionError(f"empty classes: {empty.tolist()}")
        arr = arr.copy()
        arr.setflags(write=False)
        return cls(labels=arr, num_classes=int(num_classes))

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True)
class SteadyState:
    """Closed-form infinite-time limit of a complex random walk.

    ``degenerate`` is set when the projection coefficient of the initial
    condition vanishes (the limit is the zero vector).
    """

    values: np.ndarray
    phases: np.ndarray
    degenerate: bool


@dataclass(frozen=True)
class BalanceCheck:
    """Outcome of a balance verification.

    ``witness`` is a closed node sequence (first == last) whose phase is
    nonzero when the graph is unbalanced, otherwise None. ``potentials`` holds
    the spanning-tree node phases used by the checker; on a balanced graph
    phi_j - phi_i matches every edge phase mod 2*pi.
    """

    balanced: bool
    witness: list | None
    potentials: np.ndarray


def _edge_phase(g: ComplexWeightedGraph, u, v):
    w = g.weight(u, v)
    if w == 0:
        raise PhaseUndefinedError(f"zero weight on edge ({u}, {v})")
    return cmath.phase(w) % TWO_PI


def path_phase(g: ComplexWeightedGraph, path):
    """Sum of edge phases along a directed node sequence, mod 2*pi."""
    if len(path) < 2:
        return 0.0
    total = 0.0
    for u, v in zip(path[:-1], path[1:]):
        if not g.has_edge(u, v):
            raise PathError(f"nodes {u} and {v} are not adjacent")
        total += _edge_phase(g, u, v)
    return total % TWO_PI


def _circular_misfit(a):
    """Distance of an angle from 0 on the circle."""
    return abs((a + np.pi) % TWO_PI - np.pi)


def _spanning_tree_potentials(g: ComplexWeightedGraph):
    """BFS potentials with parent pointers; errors if disconnected."""
    parent = np.full(g.n, -1, dtype=np.int64)
    phi = np.zeros(g.n)
    seen = np.zeros(g.n, dtype=bool)
    seen[0] = True
    adj = g.adjacency
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    parent[v] = u
                    phi[v] = (phi[u] + _edge_phase(g, u, v)) % TWO_PI
                    nxt.append(v)
        frontier = nxt
    if not seen.all():
        missing = np.flatnonzero(~seen)
        raise ConnectivityError(f"graph is disconnected (unreached nodes {missing.tolist()})")
    return phi, parent


def _fundamental_cycle(parent, i, j):
    """Node sequence i -> ... -> j -> i through the spanning tree."""
    up_i = [int(i)]
    while parent[up_i[-1]] >= 0:
        up_i.append(int(parent[up_i[-1]]))
    on_i = {u: k for k, u in enumerate(up_i)}
    up_j = [int(j)]
    while up_j[-1] not in on_i:
        up_j.append(int(parent[up_j[-1]]))
    lca = up_j[-1]
    cycle = up_i[: on_i[lca] + 1] + list(reversed(up_j[:-1])) + [int(i)]
    return cycle


def is_structurally_balanced(g: ComplexWeightedGraph, tol=1e-10) -> BalanceCheck:
    """Check that every cycle phase vanishes, via spanning-tree potentials.

    Requires a connected graph and nonzero weights on all stored edges. On
    failure the witness is one violating fundamental cycle (or a negative
    self-loop, reported as [i, i]).
    """
    phi, parent = _spanning_tree_potentials(g)
    if g.self_loops is not None:
        negative = np.flatnonzero(g.self_loops < 0)
        if len(negative):
            i = int(negative[0])
            return BalanceCheck(balanced=False, witness=[i, i], potentials=phi)
    for i, j in zip(g.edge_i, g.edge_j):
        theta = _edge_phase(g, int(i), int(j))
        misfit = _circular_misfit(phi[j] - phi[i] - theta)
        if misfit > tol:
            cycle = _fundamental_cycle(parent, int(i), int(j))
            return BalanceCheck(balanced=False, witness=cycle, potentials=phi)
    return BalanceCheck(balanced=True, witness=None, potentials=phi)


def construct_balanced_weights(g: Graph, part: Partition, add_self_loops=True) -> ComplexWeightedGraph:
    """Assign unit-magnitude weights realizing the partition as a balance structure.

    Class c gets the potential 2*pi*c/C and each edge the potential difference
    e^{i(phi_cj - phi_ci)}; intra-class edges come out exactly 1. Equal spacing
    makes the C steady-state phases pairwise distinct with a maximal minimum
    gap. Self-loops (weight 1) keep the walk aperiodic.
    """
    if len(part) != g.n:
        raise PartitionError(f"partition length {len(part)} != node count {g.n}")
    if not g.is_connected():
        raise ConnectivityError("constructive weight assignment requires a connected graph")
    phases = TWO_PI * part.labels.astype(float) / part.num_classes
    delta = phases[g.edge_j] - phases[g.edge_i]
    same = part.labels[g.edge_i] == part.labels[g.edge_j]
    w_re = np.where(same, 1.0, np.cos(delta))
    w_im = np.where(same, 0.0, np.sin(delta))
    loops = np.ones(g.n) if add_self_loops else None
    return ComplexWeightedGraph.from_edges(
        g.n,
        list(zip(g.edge_i.tolist(), g.edge_j.tolist())),
        (w_re + 1j * w_im).tolist(),
        self_loops=loops,
    )


def class_path_phases(g: ComplexWeightedGraph, part: Partition, check: BalanceCheck):
    """Phase of a path from a class-0 node to each class, from tree potentials."""
    reps = [int(np.flatnonzero(part.labels == c)[0]) for c in range(part.num_classes)]
    ref = check.potentials[reps[0]]
    return np.array([(check.potentials[r] - ref) % TWO_PI for r in reps])


def steady_state_closed_form(g: ComplexWeightedGraph, part: Partition, x0) -> SteadyState:
    """Steady state of the complex walk on a balanced graph.

    With node path phases theta_j (phase of a path from a class-0 node to
    node j, constant on classes) the walk matrix factors as
    P = S* (Q^{-1}|W|) S with S = diag(e^{i theta}), so the row-stochastic
    limit gives

        x_hat_j = e^{-i theta_j} * sum_k x0_k e^{i theta_k} d_k / (2m).

    Every node keeps the same magnitude |coeff| and the phases encode the
    classes. ``degenerate`` flags |coeff| < 1e-12 (zero steady state).
    Requires balance (checked) and aperiodicity (self-loops in all paths
    that exercise the theorem).
    """
    if len(part) != g.n:
        raise PartitionError(f"partition length {len(part)} != node count {g.n}")
    x0 = np.asarray(x0, dtype=np.complex128)
    if x0.shape != (g.n,):
        raise PartitionError(f"x0 must be a length-{g.n} complex vector")
    check = is_structurally_balanced(g)
    if not check.balanced:
        raise BalanceError(f"graph is not balanced; witness cycle {check.witness}")
    theta_c = class_path_phases(g, part, check)
    theta = theta_c[part.labels]
    d = complex_degrees(g)
    two_m = d.sum()
    coeff = (x0 * np.exp(1j * theta)) @ (d / two_m)
    values = np.exp(-1j * theta) * coeff
    phases = np.where(np.abs(values) > 1e-12, phase_of(values.real, values.imag), 0.0)
    return SteadyState(values=values, phases=phases, degenerate=bool(abs(coeff) < 1e-12))


def recover_partition_from_phases(ss: SteadyState, expected_classes, merge_tol=1e-6) -> Partition:
    """Cluster steady-state phases into classes by circular proximity.

    Phases within ``merge_tol`` radians (circularly) fall into one cluster;
    clusters are labelled in order of first appearance so the result is
    deterministic. Raises SeparationError when the cluster count differs from
    ``expected_classes``.
    """
    if ss.degenerate:
        raise BalanceError("steady state is degenerate; phases carry no class signal")
    phases = ss.phases
    n = len(phases)
    order = np.argsort(phases, kind="stable")
    sorted_phases = phases[order]
    cluster_of_sorted = np.zeros(n, dtype=np.int64)
    cluster = 0
    for k in range(1, n):
        if sorted_phases[k] - sorted_phases[k - 1] > merge_tol:
            cluster += 1
        cluster_of_sorted[k] = cluster
    num = cluster + 1
    # The circle wraps: merge the last run into the first when the gap
    # through 0 is within tolerance.
    if num > 1 and (sorted_phases[0] + TWO_PI - sorted_phases[-1]) <= merge_tol:
        cluster_of_sorted[cluster_of_sorted == cluster] = 0
        num -= 1
    raw = np.zeros(n, dtype=np.int64)
    raw[order] = cluster_of_sorted
    if num != expected_classes:
        sizes = np.bincount(raw, minlength=num).tolist()
        hist, _ = np.histogram(phases, bins=16, range=(0.0, TWO_PI))
        raise SeparationError(expected_classes, num, sizes, hist.tolist())
    relabel = {}
    labels = np.zeros(n, dtype=np.int64)
    for i in range(n):
        labels[i] = relabel.setdefault(int(raw[i]), len(relabel))
    return Partition.from_labels(labels, num_classes=num)


def same_partition(a: Partition, b: Partition) -> bool:
    """True when the two partitions agree up to a relabeling of classes."""
    if len(a) != len(b) or a.num_classes != b.num_classes:
        return False
    mapping = {}
    for la, lb in zip(a.labels, b.labels):
        if mapping.setdefault(int(la), int(lb)) != lb:
            return False
    return len(set(mapping.values())) == len(mapping)
