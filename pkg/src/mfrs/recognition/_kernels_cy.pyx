# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Cython kernel lane. Same contract and arithmetic as _kernels_np;
see that module for the descriptor layout."""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, floor, sqrt
from libc.string cimport memset

cdef double PI = 3.141592653589793


cdef void _cell_hist(const double[:, ::1] gray, Py_ssize_t y0, Py_ssize_t x0,
                     Py_ssize_t size, Py_ssize_t cell, Py_ssize_t bins,
                     double* hist) noexcept nogil:
    # Histogram of the size x size subwindow at (y0, x0). Neighbour reads
    # clamp at the subwindow border (same as cropping then replicating).
    cdef Py_ssize_t cx = size / cell
    cdef Py_ssize_t y, x, xl, xr, yu, yd, k0, k1, cyi, cxi
    cdef double dx, dy, mag, deg, t, frac, binw
    binw = 180.0 / bins
    memset(hist, 0, cx * cx * bins * sizeof(double))
    for y in range(size):
        yu = y - 1 if y > 0 else 0
        yd = y + 1 if y < size - 1 else size - 1
        cyi = y / cell
        for x in range(size):
            xl = x - 1 if x > 0 else 0
            xr = x + 1 if x < size - 1 else size - 1
            dx = gray[y0 + y, x0 + xr] - gray[y0 + y, x0 + xl]
            dy = gray[y0 + yd, x0 + x] - gray[y0 + yu, x0 + x]
            mag = sqrt(dx * dx + dy * dy)
            if mag == 0.0:
                continue
            deg = atan2(dy, dx) * (180.0 / PI)
            if deg < 0.0:
                deg += 180.0
            if deg >= 180.0:
                deg -= 180.0
            t = deg / binw
            k0 = <Py_ssize_t>floor(t)
            frac = t - k0
            if k0 >= bins:
                k0 -= bins
            k1 = k0 + 1
            if k1 == bins:
                k1 = 0
            cxi = x / cell
            hist[(cyi * cx + cxi) * bins + k0] += mag * (1.0 - frac)
            hist[(cyi * cx + cxi) * bins + k1] += mag * frac


cdef void _blocks(const double* hist, Py_ssize_t cells, Py_ssize_t block,
                  Py_ssize_t bins, double norm_eps, double* out) noexcept nogil:
    # L2-Hys normalised block descriptors, blocks and cells row-major.
    # The first norm is regularised with norm_eps (see _kernels_np).
    cdef Py_ssize_t nb = cells - block + 1
    cdef Py_ssize_t blen = block * block * bins
    cdef Py_ssize_t by, bx, i, j, b, pos
    cdef double n1, n2, val
    cdef double* dst
    for by in range(nb):
        for bx in range(nb):
            dst = out + (by * nb + bx) * blen
            pos = 0
            for i in range(block):
                for j in range(block):
                    for b in range(bins):
                        dst[pos] = hist[((by + i) * cells + bx + j) * bins + b]
                        pos += 1
            n1 = 0.0
            for i in range(blen):
                n1 += dst[i] * dst[i]
            n1 = sqrt(n1 + norm_eps * norm_eps)
            if n1 > 0.0:
                for i in range(blen):
                    val = dst[i] / n1
                    dst[i] = val if val < 0.2 else 0.2
                n2 = 0.0
                for i in range(blen):
                    n2 += dst[i] * dst[i]
                n2 = sqrt(n2)
                if n2 > 0.0:
                    for i in range(blen):
                        dst[i] /= n2


def hog_descriptor(gray, Py_ssize_t cell, Py_ssize_t block, Py_ssize_t bins,
                   double norm_eps=0.0):
    """Descriptor of one square grayscale window."""
    cdef cnp.ndarray[double, ndim=2, mode="c"] g = np.ascontiguousarray(gray, dtype=np.float64)
    cdef Py_ssize_t size = g.shape[0]
    cdef Py_ssize_t cells = size / cell
    cdef Py_ssize_t nb = cells - block + 1
    cdef cnp.ndarray[double, ndim=1] hist = np.zeros(cells * cells * bins, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(nb * nb * block * block * bins, dtype=np.float64)
    cdef double[:, ::1] gv = g
    _cell_hist(gv, 0, 0, size, cell, bins, <double*>hist.data)
    _blocks(<double*>hist.data, cells, block, bins, norm_eps, <double*>out.data)
    return out


def hog_batch(wins, Py_ssize_t cell, Py_ssize_t block, Py_ssize_t bins,
              double norm_eps=0.0):
    """Descriptors for a (N, H, W) stack of grayscale windows."""
    cdef cnp.ndarray[double, ndim=3, mode="c"] w = np.ascontiguousarray(wins, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t size = w.shape[1]
    cdef Py_ssize_t cells = size / cell
    cdef Py_ssize_t nb = cells - block + 1
    cdef Py_ssize_t dlen = nb * nb * block * block * bins
    cdef cnp.ndarray[double, ndim=1] hist = np.zeros(cells * cells * bins, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] out = np.zeros((n, dlen), dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(n):
        _cell_hist(w[i], 0, 0, size, cell, bins, <double*>hist.data)
        _blocks(<double*>hist.data, cells, block, bins, norm_eps, <double*>out.data + i * dlen)
    return out


def scan_level(gray, weights, double bias, Py_ssize_t window, Py_ssize_t stride,
               Py_ssize_t cell, Py_ssize_t block, Py_ssize_t bins, double threshold,
               double norm_eps=0.0):
    """Slide a window over one pyramid level; see _kernels_np.scan_level."""
    cdef cnp.ndarray[double, ndim=2, mode="c"] g = np.ascontiguousarray(gray, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] wts = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t h = g.shape[0]
    cdef Py_ssize_t w = g.shape[1]
    xs_out, ys_out, sc_out = [], [], []
    if h < window or w < window:
        return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64),
                np.empty(0, dtype=np.float64))
    cdef Py_ssize_t cells = window / cell
    cdef Py_ssize_t nb = cells - block + 1
    cdef Py_ssize_t dlen = nb * nb * block * block * bins
    cdef cnp.ndarray[double, ndim=1] hist = np.zeros(cells * cells * bins, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] desc = np.zeros(dlen, dtype=np.float64)
    cdef double* hp = <double*>hist.data
    cdef double* dp = <double*>desc.data
    cdef double* wp = <double*>wts.data
    cdef double[:, ::1] gv = g
    cdef Py_ssize_t y, x, i
    cdef double score, mass
    for y in range(0, h - window + 1, stride):
        for x in range(0, w - window + 1, stride):
            _cell_hist(gv, y, x, window, cell, bins, hp)
            # a window with no gradient energy cannot be a face
            mass = 0.0
            for i in range(cells * cells * bins):
                mass += hp[i]
            if mass == 0.0:
                continue
            _blocks(hp, cells, block, bins, norm_eps, dp)
            score = bias
            for i in range(dlen):
                score += wp[i] * dp[i]
            if score > threshold:
                xs_out.append(x)
                ys_out.append(y)
                sc_out.append(score)
    return (np.asarray(xs_out, dtype=np.int64), np.asarray(ys_out, dtype=np.int64),
            np.asarray(sc_out, dtype=np.float64))


def project(mat, vec):
    """mat @ vec with sequential per-row accumulation."""
    cdef cnp.ndarray[double, ndim=2, mode="c"] m = np.ascontiguousarray(mat, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] v = np.ascontiguousarray(vec, dtype=np.float64)
    cdef Py_ssize_t rows = m.shape[0]
    cdef Py_ssize_t cols = m.shape[1]
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(rows, dtype=np.float64)
    cdef double* op = <double*>out.data
    cdef double* vp = <double*>v.data
    cdef double* mp
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(rows):
        mp = <double*>m.data + i * cols
        acc = 0.0
        for j in range(cols):
            acc += mp[j] * vp[j]
        op[i] = acc
    return out
