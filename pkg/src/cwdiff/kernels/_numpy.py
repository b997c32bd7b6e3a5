"""Pure-numpy kernel implementations.

Fallback backend used when the compiled extension is unavailable (or when
CWDIFF_PURE_PYTHON is set). Semantics are identical to ``_native``; the
parity tests in tests/test_kernels.py hold both backends to each other.

All sparse inputs are flat entry arrays (COO over a row-sorted pattern);
feature matrices use the split real layout (n, 2f) with real parts in the
first f columns.
"""

import numpy as np


def complex_coo_matmat(rows, cols, a_re, a_im, x, n):
    """y = A @ X for complex A given by entries, X in split layout."""
    f = x.shape[1] // 2
    xr = x[cols, :f]
    xi = x[cols, f:]
    ar = a_re[:, None]
    ai = a_im[:, None]
    out = np.zeros((n, 2 * f))
    np.add.at(out[:, :f], rows, ar * xr - ai * xi)
    np.add.at(out[:, f:], rows, ar * xi + ai * xr)
    return out


def real_coo_matmat(rows, cols, vals, x, n):
    """y = A @ X for real sparse A given by entries."""
    out = np.zeros((n, x.shape[1]))
    np.add.at(out, rows, vals[:, None] * x[cols])
    return out


def edge_degrees(src, dst, w, n):
    """q_i = sum of |w_k| over stored edges incident to i (self-loops once)."""
    mag = np.hypot(w[:, 0], w[:, 1])
    q = np.bincount(src, weights=mag, minlength=n)
    off = src != dst
    q += np.bincount(dst[off], weights=mag[off], minlength=n)
    return q


def edge_degrees_backward(src, dst, w, gq):
    """Adjoint of edge_degrees; zero subgradient where |w| < 1e-12."""
    mag = np.hypot(w[:, 0], w[:, 1])
    scale = gq[src] + np.where(src != dst, gq[dst], 0.0)
    scale = np.where(mag < 1e-12, 0.0, scale / np.maximum(mag, 1e-300))
    return scale[:, None] * w


def propagate_forward(rows, cols, edge_id, signs, w, denom, x):
    """(I - P) @ X with P = W / denom row-wise.

    W is Hermitian with stored-edge values ``w`` (m, 2); each pattern entry
    references a stored edge and carries a conjugation sign for the imaginary
    part. Returns (y, z) where z = W @ X is kept for the backward pass.
    """
    f = x.shape[1] // 2
    vr = w[edge_id, 0]
    vi = signs * w[edge_id, 1]
    xr = x[cols, :f]
    xi = x[cols, f:]
    z = np.zeros_like(x)
    np.add.at(z[:, :f], rows, vr[:, None] * xr - vi[:, None] * xi)
    np.add.at(z[:, f:], rows, vr[:, None] * xi + vi[:, None] * xr)
    y = x - z / denom[:, None]
    return y, z


def propagate_backward(rows, cols, edge_id, signs, w, denom, active, x, z, g):
    """Adjoints of propagate_forward w.r.t. (w, q, x).

    ``active`` marks rows where the degree exceeded the floor (the max is
    differentiable through q there, constant otherwise).
    """
    f = x.shape[1] // 2
    h = g / denom[:, None]
    gq = np.where(active, np.einsum("ij,ij->i", g, z) / denom**2, 0.0)

    vr = w[edge_id, 0]
    vi = signs * w[edge_id, 1]
    hr = h[rows, :f]
    hi = h[rows, f:]
    xr = x[cols, :f]
    xi = x[cols, f:]

    gx = g.copy()
    np.add.at(gx[:, :f], cols, -(vr[:, None] * hr + vi[:, None] * hi))
    np.add.at(gx[:, f:], cols, -(vr[:, None] * hi - vi[:, None] * hr))

    s_re = np.einsum("ec,ec->e", hr, xr) + np.einsum("ec,ec->e", hi, xi)
    s_im = np.einsum("ec,ec->e", hr, xi) - np.einsum("ec,ec->e", hi, xr)
    gw = np.zeros_like(w)
    np.add.at(gw[:, 0], edge_id, -s_re)
    np.add.at(gw[:, 1], edge_id, signs * s_im)
    return gw, gq, gx
