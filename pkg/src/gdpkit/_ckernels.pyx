# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same call signatures as gdpkit._pykernels."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

NAME = "cython"


def lbp_code_map(pixels):
    cdef const unsigned char[:, ::1] p = np.ascontiguousarray(pixels, dtype=np.uint8)
    cdef Py_ssize_t h = p.shape[0], w = p.shape[1], r, c
    out_arr = np.empty((h - 2, w - 2), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef int cen, code
    for r in range(1, h - 1):
        for c in range(1, w - 1):
            cen = p[r, c]
            code = ((p[r - 1, c - 1] >= cen) << 7) | ((p[r - 1, c] >= cen) << 6) \
                | ((p[r - 1, c + 1] >= cen) << 5) | ((p[r, c + 1] >= cen) << 4) \
                | ((p[r + 1, c + 1] >= cen) << 3) | ((p[r + 1, c] >= cen) << 2) \
                | ((p[r + 1, c - 1] >= cen) << 1) | (p[r, c - 1] >= cen)
            out[r - 1, c - 1] = <unsigned char>code
    return out_arr


def gdp_code_map(pixels):
    cdef const unsigned char[:, ::1] p = np.ascontiguousarray(pixels, dtype=np.uint8)
    cdef Py_ssize_t h = p.shape[0], w = p.shape[1], r, c
    out_arr = np.empty((h - 2, w - 2), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef int s0, s1, s2, s3, s4, s5, s6, s7, t
    cdef int r0, r1, r2, r3, r4, r5, r6, r7
    for r in range(1, h - 1):
        for c in range(1, w - 1):
            s0 = p[r - 1, c - 1]; s1 = p[r - 1, c]; s2 = p[r - 1, c + 1]
            s3 = p[r, c + 1]; s4 = p[r + 1, c + 1]; s5 = p[r + 1, c]
            s6 = p[r + 1, c - 1]; s7 = p[r, c - 1]
            t = 3 * (s0 + s1 + s2 + s3 + s4 + s5 + s6 + s7)
            r0 = 8 * (s7 + s0 + s1) - t
            r1 = 8 * (s0 + s1 + s2) - t
            r2 = 8 * (s1 + s2 + s3) - t
            r3 = 8 * (s2 + s3 + s4) - t
            r4 = 8 * (s3 + s4 + s5) - t
            r5 = 8 * (s4 + s5 + s6) - t
            r6 = 8 * (s5 + s6 + s7) - t
            r7 = 8 * (s6 + s7 + s0) - t
            out[r - 1, c - 1] = <unsigned char>(
                ((r0 >= r4) << 3) | ((r1 >= r5) << 2) | ((r2 >= r6) << 1) | (r3 >= r7))
    return out_arr


def block_counts(codes, row_block, col_block, Py_ssize_t n, lut, Py_ssize_t nbins):
    cdef const unsigned char[:, ::1] cv = np.ascontiguousarray(codes, dtype=np.uint8)
    cdef const cnp.intp_t[::1] rb = np.ascontiguousarray(row_block, dtype=np.intp)
    cdef const cnp.intp_t[::1] cb = np.ascontiguousarray(col_block, dtype=np.intp)
    cdef const short[::1] lv = np.ascontiguousarray(lut, dtype=np.int16)
    out_arr = np.zeros((n * n, nbins), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    cdef Py_ssize_t r, c, base
    cdef short b
    for r in range(cv.shape[0]):
        base = rb[r] * n
        for c in range(cv.shape[1]):
            b = lv[cv[r, c]]
            if b >= 0:
                out[base + cb[c], b] += 1
    return out_arr


def dcd_epoch(X, y, alpha, w, qii, order, double c):
    cdef const double[:, ::1] xv = X
    cdef const double[::1] yv = y
    cdef double[::1] av = alpha
    cdef double[::1] wv = w
    cdef const double[::1] qv = qii
    cdef const cnp.intp_t[::1] ov = np.ascontiguousarray(order, dtype=np.intp)
    cdef Py_ssize_t d = xv.shape[1], k, j, i
    cdef double g, a, pg, new, step
    for k in range(ov.shape[0]):
        i = ov[k]
        g = 0.0
        for j in range(d):
            g += wv[j] * xv[i, j]
        g = yv[i] * g - 1.0
        a = av[i]
        if a == 0.0:
            pg = g if g < 0.0 else 0.0
        elif a == c:
            pg = g if g > 0.0 else 0.0
        else:
            pg = g
        if pg != 0.0 and qv[i] > 0.0:
            new = a - g / qv[i]
            if new < 0.0:
                new = 0.0
            elif new > c:
                new = c
            av[i] = new
            step = (new - a) * yv[i]
            for j in range(d):
                wv[j] += step * xv[i, j]
