"""Vectorised numpy kernels; used when the compiled extension is unavailable."""

import numpy as np

NAME = "python"


def _ring(pixels):
    """Eight shifted interior views in ring order NW, N, NE, E, SE, S, SW, W."""
    p = np.asarray(pixels, dtype=np.int32)
    h, w = p.shape
    return [
        p[0:h - 2, 0:w - 2], p[0:h - 2, 1:w - 1], p[0:h - 2, 2:w],
        p[1:h - 1, 2:w], p[2:h, 2:w], p[2:h, 1:w - 1],
        p[2:h, 0:w - 2], p[1:h - 1, 0:w - 2],
    ]


def lbp_code_map(pixels):
    p = np.asarray(pixels, dtype=np.int32)
    center = p[1:-1, 1:-1]
    code = np.zeros(center.shape, dtype=np.int32)
    for s in _ring(p):
        code = (code << 1) | (s >= center)
    return code.astype(np.uint8)


def gdp_code_map(pixels):
    ring = _ring(pixels)
    total = sum(ring)
    resp = [8 * (ring[d - 1] + ring[d] + ring[(d + 1) % 8]) - 3 * total for d in range(8)]
    code = np.zeros(total.shape, dtype=np.int32)
    for a in range(4):
        code = (code << 1) | (resp[a] >= resp[a + 4])
    return code.astype(np.uint8)


def block_counts(codes, row_block, col_block, n, lut, nbins):
    codes = np.asarray(codes)
    bins = np.asarray(lut)[codes]
    block = row_block[:, None] * n + col_block[None, :]
    keep = bins >= 0
    flat = block[keep].astype(np.int64) * nbins + bins[keep]
    counts = np.bincount(flat, minlength=n * n * nbins)
    return counts.reshape(n * n, nbins)


def dcd_epoch(X, y, alpha, w, qii, order, c):
    """One sweep of dual coordinate descent for the L1-loss linear SVM.

    Updates ``alpha`` and ``w`` in place; ``X`` already carries the bias column.
    """
    for i in order:
        xi = X[i]
        g = y[i] * float(np.dot(w, xi)) - 1.0
        a = alpha[i]
        if a == 0.0:
            pg = min(g, 0.0)
        elif a == c:
            pg = max(g, 0.0)
        else:
            pg = g
        if pg != 0.0 and qii[i] > 0.0:
            new = min(max(a - g / qii[i], 0.0), c)
            alpha[i] = new
            w += (new - a) * y[i] * xi
