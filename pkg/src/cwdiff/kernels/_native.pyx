# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend. Mirrors cwdiff.kernels._numpy exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport hypot

ctypedef cnp.int64_t idx_t


def complex_coo_matmat(const idx_t[::1] rows, const idx_t[::1] cols,
                       const double[::1] a_re, const double[::1] a_im,
                       const double[:, ::1] x, Py_ssize_t n):
    cdef Py_ssize_t f = x.shape[1] // 2
    cdef Py_ssize_t m = rows.shape[0]
    out = np.zeros((n, 2 * f))
    cdef double[:, ::1] y = out
    cdef Py_ssize_t e, c, i, j
    cdef double vr, vi
    for e in range(m):
        i = rows[e]
        j = cols[e]
        vr = a_re[e]
        vi = a_im[e]
        for c in range(f):
            y[i, c] += vr * x[j, c] - vi * x[j, f + c]
            y[i, f + c] += vr * x[j, f + c] + vi * x[j, c]
    return out


def real_coo_matmat(const idx_t[::1] rows, const idx_t[::1] cols,
                    const double[::1] vals, const double[:, ::1] x,
                    Py_ssize_t n):
    cdef Py_ssize_t k = x.shape[1]
    cdef Py_ssize_t m = rows.shape[0]
    out = np.zeros((n, k))
    cdef double[:, ::1] y = out
    cdef Py_ssize_t e, c, i, j
    cdef double v
    for e in range(m):
        i = rows[e]
        j = cols[e]
        v = vals[e]
        for c in range(k):
            y[i, c] += v * x[j, c]
    return out


def edge_degrees(const idx_t[::1] src, const idx_t[::1] dst,
                 const double[:, ::1] w, Py_ssize_t n):
    cdef Py_ssize_t m = src.shape[0]
    out = np.zeros(n)
    cdef double[::1] q = out
    cdef Py_ssize_t k
    cdef double mag
    for k in range(m):
        mag = hypot(w[k, 0], w[k, 1])
        q[src[k]] += mag
        if dst[k] != src[k]:
            q[dst[k]] += mag
    return out


def edge_degrees_backward(const idx_t[::1] src, const idx_t[::1] dst,
                          const double[:, ::1] w, const double[::1] gq):
    cdef Py_ssize_t m = src.shape[0]
    out = np.zeros((m, 2))
    cdef double[:, ::1] gw = out
    cdef Py_ssize_t k
    cdef double mag, scale
    for k in range(m):
        mag = hypot(w[k, 0], w[k, 1])
        if mag < 1e-12:
            continue
        scale = gq[src[k]]
        if dst[k] != src[k]:
            scale += gq[dst[k]]
        gw[k, 0] = scale * w[k, 0] / mag
        gw[k, 1] = scale * w[k, 1] / mag
    return out


def propagate_forward(const idx_t[::1] rows, const idx_t[::1] cols,
                      const idx_t[::1] edge_id, const double[::1] signs,
                      const double[:, ::1] w, const double[::1] denom,
                      const double[:, ::1] x):
    cdef Py_ssize_t f = x.shape[1] // 2
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t n = x.shape[0]
    z_arr = np.zeros((n, 2 * f))
    y_arr = np.empty((n, 2 * f))
    cdef double[:, ::1] z = z_arr
    cdef double[:, ::1] y = y_arr
    cdef Py_ssize_t e, c, i, j, k
    cdef double vr, vi, d
    for e in range(m):
        i = rows[e]
        j = cols[e]
        k = edge_id[e]
        vr = w[k, 0]
        vi = signs[e] * w[k, 1]
        for c in range(f):
            z[i, c] += vr * x[j, c] - vi * x[j, f + c]
            z[i, f + c] += vr * x[j, f + c] + vi * x[j, c]
    for i in range(n):
        d = denom[i]
        for c in range(2 * f):
            y[i, c] = x[i, c] - z[i, c] / d
    return y_arr, z_arr


def propagate_backward(const idx_t[::1] rows, const idx_t[::1] cols,
                       const idx_t[::1] edge_id, const double[::1] signs,
                       const double[:, ::1] w, const double[::1] denom,
                       const cnp.uint8_t[::1] active, const double[:, ::1] x,
                       const double[:, ::1] z, const double[:, ::1] g):
    cdef Py_ssize_t f = x.shape[1] // 2
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t nw = w.shape[0]
    gw_arr = np.zeros((nw, 2))
    gq_arr = np.zeros(n)
    gx_arr = np.array(g, copy=True)
    h_arr = np.empty((n, 2 * f))
    cdef double[:, ::1] gw = gw_arr
    cdef double[::1] gq = gq_arr
    cdef double[:, ::1] gx = gx_arr
    cdef double[:, ::1] h = h_arr
    cdef Py_ssize_t e, c, i, j, k
    cdef double vr, vi, d, acc, hre, him, xre, xim, s_re, s_im
    for i in range(n):
        d = denom[i]
        acc = 0.0
        for c in range(2 * f):
            h[i, c] = g[i, c] / d
            acc += g[i, c] * z[i, c]
        if active[i]:
            gq[i] = acc / (d * d)
    for e in range(m):
        i = rows[e]
        j = cols[e]
        k = edge_id[e]
        vr = w[k, 0]
        vi = signs[e] * w[k, 1]
        s_re = 0.0
        s_im = 0.0
        for c in range(f):
            hre = h[i, c]
            him = h[i, f + c]
            xre = x[j, c]
            xim = x[j, f + c]
            gx[j, c] -= vr * hre + vi * him
            gx[j, f + c] -= vr * him - vi * hre
            s_re += hre * xre + him * xim
            s_im += hre * xim - him * xre
        gw[k, 0] -= s_re
        gw[k, 1] += signs[e] * s_im
    return gw_arr, gq_arr, gx_arr
