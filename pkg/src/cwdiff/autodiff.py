"""Minimal reverse-mode differentiation over dense real arrays.

A Tape records operations eagerly (define-by-run); ``backward`` walks the
record once in reverse and returns a name -> gradient map for the registered
parameters. Only what the model needs is implemented: dense primitives, a
couple of fused split-layout transforms, and the sparse complex propagation
(I - P) X with gradients through both the stored edge weights and the degree
normalization.

One backward pass per tape; parameters not reached by the loss get zero
gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ShapeError


class Tape:
    """Append-only operation record; topological by construction."""

    def __init__(self):
        self._values = []
        self._parents = []
        self._vjps = []
        self._params = {}
        self._spent = False

    def _record(self, value, parents=(), vjp=None):
        self._values.append(value)
        self._parents.append(tuple(p.index for p in parents))
        self._vjps.append(vjp)
        return Var(self, len(self._values) - 1)

    def param(self, name, value):
        """Register a leaf whose gradient is reported by backward()."""
        if name in self._params:
            raise ValueError(f"duplicate parameter name {name!r}")
        var = self._record(np.asarray(value, dtype=np.float64))
        self._params[name] = var.index
        return var

    def constant(self, value):
        return self._record(np.asarray(value, dtype=np.float64))

    def backward(self, loss):
        """Populate adjoints from a scalar loss; returns name -> gradient."""
        if loss.tape is not self:
            raise ValueError("loss belongs to a different tape")
        if self._spent:
            raise RuntimeError("tape already differentiated; record a fresh forward pass")
        if loss.value.shape != ():
            raise ShapeError(f"backward needs a scalar loss, got shape {loss.value.shape}")
        self._spent = True
        adjoints = [None] * len(self._values)
        adjoints[loss.index] = np.ones(())
        for idx in range(loss.index, -1, -1):
            g = adjoints[idx]
            if g is None or self._vjps[idx] is None:
                continue
            for parent, grad in zip(self._parents[idx], self._vjps[idx](g)):
                if grad is None:
                    continue
                if adjoints[parent] is None:
                    adjoints[parent] = grad
                else:
                    adjoints[parent] = adjoints[parent] + grad
        return {
            name: adjoints[i] if adjoints[i] is not None else np.zeros_like(self._values[i])
            for name, i in self._params.items()
        }


@dataclass(frozen=True)
class Var:
    """Handle into a Tape; shape fixed at creation."""

    tape: Tape
    index: int

    @property
    def value(self):
        return self.tape._values[self.index]

    @property
    def shape(self):
        return self.value.shape

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return subtract(self, other)

    def __mul__(self, other):
        return multiply(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def _join(a, b):
    if a.tape is not b.tape:
        raise ValueError("operands recorded on different tapes")
    return a.tape


def add(a: Var, b: Var) -> Var:
    """Elementwise sum; also accepts a row-vector bias as second operand."""
    t = _join(a, b)
    av, bv = a.value, b.value
    if av.shape == bv.shape:
        return t._record(av + bv, (a, b), lambda g: (g, g))
    if av.ndim == 2 and bv.shape == (av.shape[1],):
        return t._record(av + bv[None, :], (a, b), lambda g: (g, g.sum(axis=0)))
    raise ShapeError(f"cannot add shapes {av.shape} and {bv.shape}")


def subtract(a: Var, b: Var) -> Var:
    t = _join(a, b)
    if a.value.shape != b.value.shape:
        raise ShapeError(f"cannot subtract shapes {a.shape} and {b.shape}")
    return t._record(a.value - b.value, (a, b), lambda g: (g, -g))


def multiply(a: Var, b: Var) -> Var:
    t = _join(a, b)
    if a.value.shape != b.value.shape:
        raise ShapeError(f"cannot multiply shapes {a.shape} and {b.shape}")
    av, bv = a.value, b.value
    return t._record(av * bv, (a, b), lambda g: (g * bv, g * av))


def matmul(a: Var, b: Var) -> Var:
    t = _join(a, b)
    av, bv = a.value, b.value
    if av.ndim != 2 or bv.ndim != 2 or av.shape[1] != bv.shape[0]:
        raise ShapeError(f"cannot matmul shapes {av.shape} and {bv.shape}")
    return t._record(av @ bv, (a, b), lambda g: (g @ bv.T, av.T @ g))


def scale(x: Var, alpha: float) -> Var:
    alpha = float(alpha)
    return x.tape._record(alpha * x.value, (x,), lambda g: (alpha * g,))


def total(x: Var) -> Var:
    """Sum of all entries (scalar)."""
    shape = x.value.shape
    return x.tape._record(x.value.sum(), (x,), lambda g: (np.broadcast_to(g, shape),))


def transpose(x: Var) -> Var:
    if x.value.ndim != 2:
        raise ShapeError("transpose expects a matrix")
    return x.tape._record(x.value.T.copy(), (x,), lambda g: (g.T,))


def sym_sparse_apply(x: Var, operator) -> Var:
    """Left-multiply by a constant symmetric sparse matrix."""
    if x.value.ndim != 2 or x.value.shape[0] != operator.n:
        raise ShapeError(f"operator of size {operator.n} cannot act on shape {x.shape}")
    y = operator.matmat(np.ascontiguousarray(x.value))
    return x.tape._record(y, (x,), lambda g: (operator.matmat(np.ascontiguousarray(g)),))


def concat_cols(*xs: Var) -> Var:
    t = xs[0].tape
    rows = xs[0].value.shape[0]
    if any(v.value.ndim != 2 or v.value.shape[0] != rows for v in xs):
        raise ShapeError("column concat needs matching row counts")
    widths = [v.value.shape[1] for v in xs]
    splits = np.cumsum(widths)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=1))

    return t._record(np.concatenate([v.value for v in xs], axis=1), xs, vjp)


def slice_cols(x: Var, start, stop) -> Var:
    if x.value.ndim != 2 or not (0 <= start < stop <= x.value.shape[1]):
        raise ShapeError(f"bad column slice [{start}:{stop}] of shape {x.shape}")

    def vjp(g):
        out = np.zeros_like(x.value)
        out[:, start:stop] = g
        return (out,)

    return x.tape._record(x.value[:, start:stop].copy(), (x,), vjp)


def tanh(x: Var) -> Var:
    y = np.tanh(x.value)
    return x.tape._record(y, (x,), lambda g: (g * (1.0 - y * y),))


def elu(x: Var) -> Var:
    """Exponential linear unit with unit saturation."""
    v = x.value
    y = np.where(v > 0, v, np.expm1(v))
    return x.tape._record(y, (x,), lambda g: (g * np.where(v > 0, 1.0, y + 1.0),))


def apply_dropout_mask(x: Var, mask: np.ndarray) -> Var:
    """Multiply by a pre-sampled (already 1/(1-rate)-scaled) mask."""
    if mask.shape != x.value.shape:
        raise ShapeError(f"mask shape {mask.shape} != value shape {x.shape}")
    return x.tape._record(x.value * mask, (x,), lambda g: (g * mask,))


def row_gather(x: Var, index: np.ndarray) -> Var:
    if x.value.ndim != 2:
        raise ShapeError("row_gather expects a matrix")
    index = np.asarray(index, dtype=np.int64)

    def vjp(g):
        out = np.zeros_like(x.value)
        np.add.at(out, index, g)
        return (out,)

    return x.tape._record(x.value[index], (x,), vjp)


def batchnorm(x: Var, gamma: Var, beta: Var, eps=1e-5, stats=None) -> Var:
    """Column-wise batch normalization with learnable scale and shift.

    Statistics come from the current batch (and are differentiated through)
    unless ``stats=(mean, var)`` pins them to constants.
    """
    v = x.value
    k = v.shape[1]
    if gamma.value.shape != (k,) or beta.value.shape != (k,):
        raise ShapeError("gamma/beta must be length-k vectors")
    if stats is None:
        mu = v.mean(axis=0)
        var = v.var(axis=0)
        frozen = False
    else:
        mu, var = stats
        frozen = True
    ivar = 1.0 / np.sqrt(var + eps)
    xhat = (v - mu) * ivar
    y = xhat * gamma.value + beta.value
    n = v.shape[0]
    gamma_val = gamma.value

    def vjp(g):
        ggamma = (g * xhat).sum(axis=0)
        gbeta = g.sum(axis=0)
        gxhat = g * gamma_val
        if frozen:
            gx = gxhat * ivar
        else:
            gx = (gxhat - gxhat.mean(axis=0) - xhat * (gxhat * xhat).mean(axis=0)) * ivar
        return (gx, ggamma, gbeta)

    return x.tape._record(y, (x, gamma, beta), vjp)


def softmax_cross_entropy(logits: Var, labels: np.ndarray, mask: np.ndarray) -> Var:
    """Mean cross-entropy over the masked rows (scalar loss)."""
    v = logits.value
    labels = np.asarray(labels, dtype=np.int64)
    mask = np.asarray(mask, dtype=bool)
    if v.ndim != 2 or labels.shape != (v.shape[0],) or mask.shape != (v.shape[0],):
        raise ShapeError("logits (n, C), labels (n,), mask (n,) required")
    count = int(mask.sum())
    if count == 0:
        raise ValueError("empty mask in cross-entropy")
    shifted = v - v.max(axis=1, keepdims=True)
    expv = np.exp(shifted)
    probs = expv / expv.sum(axis=1, keepdims=True)
    picked = shifted[np.arange(len(labels)), labels] - np.log(expv.sum(axis=1))
    loss = -picked[mask].mean()

    def vjp(g):
        grad = probs.copy()
        grad[np.arange(len(labels)), labels] -= 1.0
        grad *= mask[:, None] / count
        return (g * grad,)

    return logits.tape._record(np.asarray(loss), (logits,), vjp)


def channel_pair_transform(x: Var, m: Var) -> Var:
    """Apply a real 2x2 matrix to every (re, im) channel pair of a split layout."""
    v = x.value
    if v.ndim != 2 or v.shape[1] % 2:
        raise ShapeError("split layout (n, 2f) required")
    if m.value.shape != (2, 2):
        raise ShapeError("pair transform needs a 2x2 matrix")
    f = v.shape[1] // 2
    xr, xi = v[:, :f], v[:, f:]
    mv = m.value
    y = np.concatenate([xr * mv[0, 0] + xi * mv[0, 1], xr * mv[1, 0] + xi * mv[1, 1]], axis=1)

    def vjp(g):
        gr, gi = g[:, :f], g[:, f:]
        gx = np.concatenate(
            [gr * mv[0, 0] + gi * mv[1, 0], gr * mv[0, 1] + gi * mv[1, 1]], axis=1
        )
        gm = np.array(
            [
                [(gr * xr).sum(), (gr * xi).sum()],
                [(gi * xr).sum(), (gi * xi).sum()],
            ]
        )
        return (gx, gm)

    return _join(x, m)._record(y, (x, m), vjp)


def block_scale(x: Var, s: Var) -> Var:
    """Scale the real block by (1 + s[0]) and the imaginary block by (1 + s[1])."""
    v = x.value
    if v.ndim != 2 or v.shape[1] % 2:
        raise ShapeError("split layout (n, 2f) required")
    if s.value.shape != (2,):
        raise ShapeError("block scale needs a length-2 vector")
    f = v.shape[1] // 2
    sv = s.value
    y = np.concatenate([v[:, :f] * (1.0 + sv[0]), v[:, f:] * (1.0 + sv[1])], axis=1)

    def vjp(g):
        gx = np.concatenate([g[:, :f] * (1.0 + sv[0]), g[:, f:] * (1.0 + sv[1])], axis=1)
        gs = np.array([(g[:, :f] * v[:, :f]).sum(), (g[:, f:] * v[:, f:]).sum()])
        return (gx, gs)

    return _join(x, s)._record(y, (x, s), vjp)


@dataclass(frozen=True)
class PropagatePattern:
    """Static sparsity of a Hermitian weight matrix over stored edges.

    One entry per direction of every stored edge, sorted row-major; ``signs``
    flips the imaginary part on the conjugated direction.
    """

    n: int
    num_edges: int
    rows: np.ndarray
    cols: np.ndarray
    edge_id: np.ndarray
    signs: np.ndarray

    @classmethod
    def build(cls, edge_i, edge_j, n):
        edge_i = np.asarray(edge_i, dtype=np.int64)
        edge_j = np.asarray(edge_j, dtype=np.int64)
        m = len(edge_i)
        ids = np.arange(m, dtype=np.int64)
        off = edge_i != edge_j  # self-loops are a single (real) diagonal entry
        rows = np.concatenate([edge_i, edge_j[off]])
        cols = np.concatenate([edge_j, edge_i[off]])
        edge_id = np.concatenate([ids, ids[off]])
        signs = np.concatenate([np.ones(m), -np.ones(int(off.sum()))])
        order = np.lexsort((cols, rows))
        arrays = (rows[order], cols[order], edge_id[order], signs[order])
        for a in arrays:
            a.setflags(write=False)
        return cls(n=int(n), num_edges=m, rows=arrays[0], cols=arrays[1],
                   edge_id=arrays[2], signs=arrays[3])


def edge_degrees(w: Var, src: np.ndarray, dst: np.ndarray, n: int) -> Var:
    """Per-node sum of stored-edge magnitudes (the complex degree vector)."""
    if w.value.ndim != 2 or w.value.shape[1] != 2:
        raise ShapeError("edge weights must be (m, 2) re/im pairs")
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    wv = w.value
    q = kernels.edge_degrees(src, dst, wv, n)

    def vjp(g):
        return (kernels.edge_degrees_backward(src, dst, wv, np.ascontiguousarray(g)),)

    return w.tape._record(q, (w,), vjp)


def complex_propagate(w: Var, q: Var, x: Var, pattern: PropagatePattern,
                      degree_floor: float) -> Var:
    """(I - P) X with P = W / max(q, floor) row-wise, on the split layout.

    Differentiates through the stored weights (numerator), the degrees
    (denominator; constant where the floor is active) and the features.
    """
    if w.value.shape != (pattern.num_edges, 2):
        raise ShapeError("weights do not match the pattern's stored edges")
    if q.value.shape != (pattern.n,):
        raise ShapeError("degree vector length mismatch")
    if x.value.ndim != 2 or x.value.shape[0] != pattern.n or x.value.shape[1] % 2:
        raise ShapeError("features must be (n, 2f) in split layout")
    _join(w, q)
    t = _join(w, x)
    wv = np.ascontiguousarray(w.value)
    xv = np.ascontiguousarray(x.value)
    denom = np.maximum(q.value, degree_floor)
    active = (q.value > degree_floor).astype(np.uint8)
    y, z = kernels.propagate_forward(pattern.rows, pattern.cols, pattern.edge_id,
                                     pattern.signs, wv, denom, xv)

    def vjp(g):
        gw, gq, gx = kernels.propagate_backward(
            pattern.rows, pattern.cols, pattern.edge_id, pattern.signs,
            wv, denom, active, xv, z, np.ascontiguousarray(g),
        )
        return (gw, gq, gx)

    return t._record(y, (w, q, x), vjp)
