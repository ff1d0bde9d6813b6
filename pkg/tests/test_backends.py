"""The compiled and numpy kernels must agree."""

import numpy as np
import pytest

from gdpkit import _backend
from gdpkit.descriptors import GDP_BIN_LUT, LBP_BIN_LUT, LBP_U_BIN_LUT

compiled = _backend.compiled
python = _backend.python

needs_ext = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


def test_selected_backend_is_known():
    assert _backend.NAME in ("cython", "python")
    if compiled is not None:
        assert _backend.kernels is compiled


@needs_ext
@pytest.mark.parametrize("shape", [(3, 3), (3, 17), (20, 4), (64, 64), (33, 90)])
def test_code_maps_agree(shape):
    img = np.random.default_rng(sum(shape)).integers(0, 256, shape, dtype=np.uint8)
    assert np.array_equal(compiled.gdp_code_map(img), python.gdp_code_map(img))
    assert np.array_equal(compiled.lbp_code_map(img), python.lbp_code_map(img))


@needs_ext
def test_extremes_agree():
    rng = np.random.default_rng(1)
    img = np.where(rng.random((40, 40)) < 0.5, 0, 255).astype(np.uint8)
    assert np.array_equal(compiled.gdp_code_map(img), python.gdp_code_map(img))
    assert np.array_equal(compiled.lbp_code_map(img), python.lbp_code_map(img))


@needs_ext
@pytest.mark.parametrize("lut, nbins, top", [(GDP_BIN_LUT, 8, 16), (LBP_BIN_LUT, 256, 256),
                                             (LBP_U_BIN_LUT, 59, 256)])
def test_block_counts_agree(lut, nbins, top):
    rng = np.random.default_rng(nbins)
    codes = rng.integers(0, top, (37, 29)).astype(np.uint8)
    n = 5
    rb = (np.arange(1, 38) * n // 39).astype(np.intp)
    cb = (np.arange(1, 30) * n // 31).astype(np.intp)
    assert np.array_equal(
        compiled.block_counts(codes, rb, cb, n, lut, nbins),
        python.block_counts(codes, rb, cb, n, lut, nbins),
    )


@needs_ext
def test_dcd_epoch_agrees():
    rng = np.random.default_rng(3)
    X = np.ascontiguousarray(rng.random((50, 21)))
    y = np.where(rng.random(50) < 0.5, 1.0, -1.0)
    q = np.einsum("ij,ij->i", X, X)
    states = []
    for k in (compiled, python):
        a, w = np.zeros(50), np.zeros(21)
        for epoch in range(5):
            k.dcd_epoch(X, y, a, w, q, np.arange(50)[::-1], 1.0)
        states.append((a, w))
    np.testing.assert_allclose(states[0][0], states[1][0], rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(states[0][1], states[1][1], rtol=1e-10, atol=1e-12)
