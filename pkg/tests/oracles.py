"""Independent oracles used by the test suite.

These deliberately avoid the code paths they check: cycle enumeration goes
through networkx, spectral limits come from dense numpy eigendecompositions,
and the balance/steady-state oracles recompute everything from the raw
weight data.
"""

import cmath

import networkx as nx
import numpy as np

TWO_PI = 2.0 * np.pi


def enumerate_cycle_phases(g):
    """Phases of all simple cycles (plus self-loop phases), by brute force."""
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    weights = {}
    for i, j, re, im in zip(g.edge_i, g.edge_j, g.w_re, g.w_im):
        G.add_edge(int(i), int(j))
        weights[(int(i), int(j))] = complex(re, im)
    phases = []
    for cycle in nx.simple_cycles(G):
        total = 0.0
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            w = weights[(a, b)] if a < b else weights[(b, a)].conjugate()
            total += cmath.phase(w)
        phases.append(total % TWO_PI)
    if g.self_loops is not None:
        for v in g.self_loops[g.self_loops != 0.0]:
            phases.append(cmath.phase(complex(v)) % TWO_PI)
    return phases


def brute_force_balanced(g, tol=1e-9):
    """Balanced iff every enumerated cycle phase is 0 mod 2*pi."""
    return all(
        min(p, TWO_PI - p) <= tol for p in enumerate_cycle_phases(g)
    )


def dense_power_limit(matrix, x0, steps):
    """matrix**steps @ x0 through a dense eigendecomposition."""
    lam, vecs = np.linalg.eig(np.asarray(matrix, dtype=np.complex128))
    coeffs = np.linalg.solve(vecs, np.asarray(x0, dtype=np.complex128))
    return vecs @ (lam**steps * coeffs)


def power_iteration_radius(matrix, iters=200, seed=0):
    """Spectral radius of a symmetric matrix via power iteration on M @ M."""
    m = np.asarray(matrix, dtype=np.float64)
    mm = m @ m
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(m.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = mm @ v
        lam = v @ w
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
    return float(np.sqrt(max(lam, 0.0)))


def circular_mean(phases):
    return cmath.phase(np.exp(1j * np.asarray(phases)).mean()) % TWO_PI


def circular_spread(phases):
    """Std of deviations from the circular mean, wrapped to (-pi, pi]."""
    mu = circular_mean(phases)
    dev = (np.asarray(phases) - mu + np.pi) % TWO_PI - np.pi
    return float(dev.std())


def wrap_to_pi(a):
    return (a + np.pi) % TWO_PI - np.pi
