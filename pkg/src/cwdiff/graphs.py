"""Graph types, Hermitian complex weights, and the derived operator matrices.

A complex-weighted graph stores one weight per undirected edge (the i <= j
half); the opposite direction is implied by complex conjugation, which makes
the full weight matrix Hermitian by construction. Real self-loop weights sit
on the diagonal. The full (both-halves) sparse pattern is materialized once
at build time, row-sorted, so the propagation kernels can run over flat
entry arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .errors import ConnectivityError, DegenerateDegreeError, GraphFormatError, ShapeError

TWO_PI = 2.0 * np.pi

# Degree floor for transition matrices built from learned weights; analytic
# constructions use 0 so a vanishing degree is a hard error there.
LEARNED_WEIGHT_DEGREE_FLOOR = 1e-8


def _as_index_array(values, name):
    arr = np.asarray(values, dtype=np.int64)
    if arr.ndim != 1:
        raise GraphFormatError(f"{name} must be one-dimensional")
    return arr


def _readonly(*arrays):
    for a in arrays:
        a.setflags(write=False)


@dataclass(frozen=True)
class Graph:
    """Undirected, unweighted simple graph with 0-based node indices."""

    n: int
    edge_i: np.ndarray
    edge_j: np.ndarray

    @classmethod
    def from_edges(cls, n, edges):
        if n <= 0:
            raise GraphFormatError("node count must be positive")
        if edges:
            ei = _as_index_array([e[0] for e in edges], "edge_i")
            ej = _as_index_array([e[1] for e in edges], "edge_j")
        else:
            ei = np.zeros(0, dtype=np.int64)
            ej = np.zeros(0, dtype=np.int64)
        lo, hi = np.minimum(ei, ej), np.maximum(ei, ej)
        if (lo < 0).any() or (hi >= n).any():
            raise GraphFormatError("edge endpoint out of range")
        if (lo == hi).any():
            raise GraphFormatError("self-loops are not allowed in an unweighted graph")
        order = np.lexsort((hi, lo))
        lo, hi = lo[order], hi[order]
        if len(lo) > 1 and ((np.diff(lo) == 0) & (np.diff(hi) == 0)).any():
            raise GraphFormatError("duplicate edge")
        _readonly(lo, hi)
        return cls(n=int(n), edge_i=lo, edge_j=hi)

    @property
    def num_edges(self):
        return len(self.edge_i)

    @cached_property
    def adjacency(self):
        """Neighbor lists, index-sorted."""
        neigh = [[] for _ in range(self.n)]
        for i, j in zip(self.edge_i, self.edge_j):
            neigh[i].append(int(j))
            neigh[j].append(int(i))
        return [sorted(v) for v in neigh]

    def degrees(self, augmented=False):
        d = np.zeros(self.n)
        np.add.at(d, self.edge_i, 1.0)
        np.add.at(d, self.edge_j, 1.0)
        if augmented:
            d += 1.0
        return d

    def is_connected(self):
        if self.n == 1:
            return True
        seen = np.zeros(self.n, dtype=bool)
        stack = [0]
        seen[0] = True
        adj = self.adjacency
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        return bool(seen.all())


@dataclass(frozen=True)
class ComplexWeightedGraph:
    """Hermitian complex-weighted graph.

    ``edge_i <= edge_j`` index the stored half; ``w_re/w_im`` are the stored
    weights and the (j, i) entries are their conjugates. ``self_loops`` is a
    real per-node diagonal (Hermitian symmetry forces it real) or None.
    """

    n: int
    edge_i: np.ndarray
    edge_j: np.ndarray
    w_re: np.ndarray
    w_im: np.ndarray
    self_loops: np.ndarray | None = None

    @classmethod
    def from_edges(cls, n, edges, weights, self_loops=None):
        """Build from an edge list and per-edge complex weights.

        ``weights`` is a sequence of complex numbers aligned with ``edges``
        (each edge given as (i, j) with i < j after normalization) or a dict
        keyed by edge tuples.
        """
        if n <= 0:
            raise GraphFormatError("node count must be positive")
        if isinstance(weights, dict):
            weights = [weights[e] for e in edges]
        if len(edges) != len(weights):
            raise GraphFormatError("edges and weights length mismatch")
        ei = np.zeros(len(edges), dtype=np.int64)
        ej = np.zeros(len(edges), dtype=np.int64)
        wr = np.zeros(len(edges))
        wi = np.zeros(len(edges))
        for k, ((i, j), w) in enumerate(zip(edges, weights)):
            w = complex(w)
            if i > j:
                i, j, w = j, i, w.conjugate()
            ei[k], ej[k], wr[k], wi[k] = i, j, w.real, w.imag
        if len(ei) and ((ei < 0).any() or (ej >= n).any()):
            raise GraphFormatError("edge endpoint out of range")
        if (ei == ej).any():
            raise GraphFormatError("diagonal weights must be passed via self_loops")
        order = np.lexsort((ej, ei))
        ei, ej, wr, wi = ei[order], ej[order], wr[order], wi[order]
        if len(ei) > 1:
            dup = (np.diff(ei) == 0) & (np.diff(ej) == 0)
            if dup.any():
                raise GraphFormatError("duplicate edge")
        loops = None
        if self_loops is not None:
            loops = np.zeros(n)
            if isinstance(self_loops, dict):
                for i, v in self_loops.items():
                    v = complex(v)
                    if abs(v.imag) > 1e-12:
                        raise GraphFormatError("self-loop weights must be real")
                    loops[i] = v.real
            else:
                arr = np.asarray(self_loops, dtype=np.complex128)
                if arr.shape != (n,):
                    raise ShapeError("self_loops must have one entry per node")
                if np.abs(arr.imag).max(initial=0.0) > 1e-12:
                    raise GraphFormatError("self-loop weights must be real")
                loops[:] = arr.real
        if not (np.isfinite(wr).all() and np.isfinite(wi).all()):
            raise GraphFormatError("weights must be finite")
        if loops is not None and not np.isfinite(loops).all():
            raise GraphFormatError("self-loop weights must be finite")
        _readonly(ei, ej, wr, wi)
        if loops is not None:
            _readonly(loops)
        return cls(n=int(n), edge_i=ei, edge_j=ej, w_re=wr, w_im=wi, self_loops=loops)

    @property
    def num_edges(self):
        return len(self.edge_i)

    @cached_property
    def _edge_lookup(self):
        return {
            (int(i), int(j)): k
            for k, (i, j) in enumerate(zip(self.edge_i, self.edge_j))
        }

    def has_edge(self, i, j):
        if i == j:
            return self.self_loops is not None and self.self_loops[i] != 0.0
        key = (i, j) if i < j else (j, i)
        return key in self._edge_lookup

    def weight(self, i, j):
        """Directed weight W_ij (conjugate of the stored half when i > j)."""
        if i == j:
            if self.self_loops is None:
                return 0j
            return complex(self.self_loops[i])
        key = (i, j) if i < j else (j, i)
        k = self._edge_lookup.get(key)
        if k is None:
            return 0j
        w = complex(self.w_re[k], self.w_im[k])
        return w if i < j else w.conjugate()

    @cached_property
    def entries(self):
        """Full materialized pattern (rows, cols, re, im), row-major sorted.

        Contains both directions of every stored edge plus nonzero self-loops.
        """
        rows = [self.edge_i, self.edge_j]
        cols = [self.edge_j, self.edge_i]
        res = [self.w_re, self.w_re]
        ims = [self.w_im, -self.w_im]
        if self.self_loops is not None:
            diag = np.flatnonzero(self.self_loops != 0.0).astype(np.int64)
            rows.append(diag)
            cols.append(diag)
            res.append(self.self_loops[diag])
            ims.append(np.zeros(len(diag)))
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        res = np.concatenate(res)
        ims = np.concatenate(ims)
        order = np.lexsort((cols, rows))
        out = (rows[order], cols[order], res[order], ims[order])
        _readonly(*out)
        return out

    def to_sparse(self):
        rows, cols, re, im = self.entries
        return SparseComplex(n=self.n, rows=rows, cols=cols, re=re, im=im)

    def skeleton(self):
        """Underlying unweighted graph (self-loops dropped)."""
        return Graph.from_edges(self.n, list(zip(self.edge_i, self.edge_j)))

    @cached_property
    def adjacency(self):
        return self.skeleton().adjacency

    def is_connected(self):
        return self.skeleton().is_connected()


@dataclass(frozen=True)
class SparseComplex:
    """Square complex sparse matrix in row-sorted coordinate form."""

    n: int
    rows: np.ndarray
    cols: np.ndarray
    re: np.ndarray
    im: np.ndarray

    def toarray(self):
        out = np.zeros((self.n, self.n), dtype=np.complex128)
        out[self.rows, self.cols] = self.re + 1j * self.im
        return out

    def matmat_split(self, x):
        """Product with an (n, 2f) split-layout feature block."""
        return kernels.complex_coo_matmat(self.rows, self.cols, self.re, self.im, x, self.n)


@dataclass(frozen=True)
class SparseReal:
    """Square real sparse matrix in row-sorted coordinate form."""

    n: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def toarray(self):
        out = np.zeros((self.n, self.n))
        out[self.rows, self.cols] = self.vals
        return out

    def matmat(self, x):
        return kernels.real_coo_matmat(self.rows, self.cols, self.vals, x, self.n)


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-normalized complex transition matrix P = Q^{-1} W.

    Rows whose degree does not exceed the floor are flagged degenerate (the
    division uses the floor there, keeping entries finite).
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    p_re: np.ndarray
    p_im: np.ndarray
    degrees: np.ndarray
    degenerate: np.ndarray
    degree_floor: float

    def to_sparse(self):
        return SparseComplex(n=self.n, rows=self.rows, cols=self.cols, re=self.p_re, im=self.p_im)

    def toarray(self):
        return self.to_sparse().toarray()


def hermitian_check(weights, tol=1e-12):
    """True iff W equals its conjugate transpose entrywise within ``tol``."""
    if isinstance(weights, SparseComplex):
        entries = {}
        for i, j, re, im in zip(weights.rows, weights.cols, weights.re, weights.im):
            entries[(int(i), int(j))] = complex(re, im)
        for (i, j), v in entries.items():
            if abs(v - entries.get((j, i), 0j).conjugate()) > tol:
                return False
        return True
    w = np.asarray(weights, dtype=np.complex128)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {w.shape}")
    return bool(np.abs(w - w.conj().T).max(initial=0.0) <= tol)


def complex_degrees(g: ComplexWeightedGraph):
    """q_i = sum_j |W_ij|, self-loop magnitude included."""
    rows, _, re, im = g.entries
    mag = np.hypot(re, im)
    return np.bincount(rows, weights=mag, minlength=g.n)


def transition_matrix(g: ComplexWeightedGraph, degree_floor=0.0) -> TransitionMatrix:
    """P = Q^{-1} W with per-row division by max(q_i, degree_floor)."""
    if degree_floor < 0:
        raise ValueError("degree_floor must be nonnegative")
    q = complex_degrees(g)
    if degree_floor == 0.0:
        dead = np.flatnonzero(q == 0.0)
        if len(dead):
            raise DegenerateDegreeError(dead.tolist())
    rows, cols, re, im = g.entries
    denom = np.maximum(q, degree_floor)
    inv = np.zeros(g.n)
    np.divide(1.0, denom, out=inv, where=denom > 0)
    p_re = re * inv[rows]
    p_im = im * inv[rows]
    degenerate = q <= degree_floor
    _readonly(p_re, p_im, q, degenerate)
    return TransitionMatrix(
        n=g.n,
        rows=rows,
        cols=cols,
        p_re=p_re,
        p_im=p_im,
        degrees=q,
        degenerate=degenerate,
        degree_floor=float(degree_floor),
    )


def _coalesce(n, rows, cols, re, im):
    order = np.lexsort((cols, rows))
    rows, cols, re, im = rows[order], cols[order], re[order], im[order]
    if len(rows) == 0:
        return rows, cols, re, im
    new_group = np.empty(len(rows), dtype=bool)
    new_group[0] = True
    new_group[1:] = (np.diff(rows) != 0) | (np.diff(cols) != 0)
    starts = np.flatnonzero(new_group)
    re = np.add.reduceat(re, starts)
    im = np.add.reduceat(im, starts)
    return rows[starts], cols[starts], re, im


def rw_laplacian(p: TransitionMatrix) -> SparseComplex:
    """Random-walk Laplacian L = I - P on the same pattern plus the diagonal."""
    diag = np.arange(p.n, dtype=np.int64)
    rows = np.concatenate([p.rows, diag])
    cols = np.concatenate([p.cols, diag])
    re = np.concatenate([-p.p_re, np.ones(p.n)])
    im = np.concatenate([-p.p_im, np.zeros(p.n)])
    rows, cols, re, im = _coalesce(p.n, rows, cols, re, im)
    _readonly(rows, cols, re, im)
    return SparseComplex(n=p.n, rows=rows, cols=cols, re=re, im=im)


def normalized_laplacian(g: Graph, augmented=False) -> SparseReal:
    """Normalized Laplacian I - D^{-1/2} A D^{-1/2} (augmented: A+I, D+I)."""
    d = g.degrees(augmented=augmented)
    if (d == 0).any():
        raise DegenerateDegreeError(np.flatnonzero(d == 0).tolist())
    inv_sqrt = 1.0 / np.sqrt(d)
    diag = np.arange(g.n, dtype=np.int64)
    rows = [g.edge_i, g.edge_j, diag]
    cols = [g.edge_j, g.edge_i, diag]
    off = -inv_sqrt[g.edge_i] * inv_sqrt[g.edge_j]
    diag_vals = np.ones(g.n)
    if augmented:
        diag_vals = diag_vals - 1.0 / d
    vals = [off, off, diag_vals]
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    _readonly(rows, cols, vals)
    return SparseReal(n=g.n, rows=rows, cols=cols, vals=vals)


def laplacian_complement(lap: SparseReal) -> SparseReal:
    """I - L, the one-step heat propagator for a normalized Laplacian."""
    diag = np.arange(lap.n, dtype=np.int64)
    rows = np.concatenate([lap.rows, diag])
    cols = np.concatenate([lap.cols, diag])
    vals = np.concatenate([-lap.vals, np.ones(lap.n)])
    rows, cols, vals, _ = _coalesce(lap.n, rows, cols, vals, np.zeros(len(vals)))
    keep = vals != 0.0
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    _readonly(rows, cols, vals)
    return SparseReal(n=lap.n, rows=rows, cols=cols, vals=vals)


def phase_of(re, im):
    """Two-argument arctangent mapped to [0, 2*pi)."""
    return np.mod(np.arctan2(im, re), TWO_PI)
