"""Block-grid partitioning and concatenated per-block code histograms."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import _backend
from .descriptors import GDP_BIN_LUT, LBP_BIN_LUT, LBP_U_BIN_LUT
from .imagecore import GrayImage


class DescriptorKind(str, enum.Enum):
    GDP = "GDP"
    LBP = "LBP"
    LBP_U = "LBP_U"

    @property
    def bins(self) -> int:
        return _BINS[self]

    @property
    def lut(self) -> np.ndarray:
        return _LUTS[self]

    @classmethod
    def parse(cls, text) -> "DescriptorKind":
        if isinstance(text, cls):
            return text
        key = str(text).strip().upper().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(
                f"unknown descriptor kind {text!r}; choose from {', '.join(k.value for k in cls)}"
            ) from None


_BINS = {DescriptorKind.GDP: 8, DescriptorKind.LBP: 256, DescriptorKind.LBP_U: 59}
_LUTS = {
    DescriptorKind.GDP: GDP_BIN_LUT,
    DescriptorKind.LBP: LBP_BIN_LUT,
    DescriptorKind.LBP_U: LBP_U_BIN_LUT,
}


def feature_length(kind, n: int) -> int:
    return n * n * DescriptorKind.parse(kind).bins


@dataclass(frozen=True)
class BlockGrid:
    n: int
    row_bounds: Tuple[int, ...]
    col_bounds: Tuple[int, ...]

    def row_block(self, rows: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.row_bounds, rows, side="right") - 1

    def col_block(self, cols: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.col_bounds, cols, side="right") - 1


def _bounds(dim: int, n: int) -> Tuple[int, ...]:
    return tuple(i * dim // n for i in range(n + 1))


def block_grid(width: int, height: int, n: int) -> BlockGrid:
    """Near-equal ``n x n`` partition; bound ``i`` sits at ``floor(i * dim / n)``."""
    if n < 1:
        raise ValueError(f"block count must be >= 1, got {n}")
    if width < n or height < n:
        raise ValueError(f"{width}x{height} image is too small for a {n}x{n} grid")
    return BlockGrid(n, _bounds(height, n), _bounds(width, n))


def extract_codes(img: GrayImage, kind) -> np.ndarray:
    """Code map over interior pixels; entry ``[r, c]`` belongs to pixel ``(r+1, c+1)``."""
    kind = DescriptorKind.parse(kind)
    if img.width < 3 or img.height < 3:
        raise ValueError(f"need at least a 3x3 image, got {img.width}x{img.height}")
    k = _backend.kernels
    if kind is DescriptorKind.GDP:
        return k.gdp_code_map(img.pixels)
    return k.lbp_code_map(img.pixels)


@dataclass(frozen=True)
class FeatureVector:
    kind: DescriptorKind
    n: int
    values: np.ndarray

    def __len__(self):
        return len(self.values)

    def blocks(self) -> np.ndarray:
        """Values reshaped to ``(n*n, bins)`` in row-major block order."""
        return self.values.reshape(self.n * self.n, self.kind.bins)


def block_histograms(img: GrayImage, kind, n: int) -> np.ndarray:
    """Raw per-block code counts, shape ``(n*n, bins)``."""
    kind = DescriptorKind.parse(kind)
    grid = block_grid(img.width, img.height, n)
    codes = extract_codes(img, kind)
    h, w = codes.shape
    rb = grid.row_block(np.arange(1, h + 1)).astype(np.intp)
    cb = grid.col_block(np.arange(1, w + 1)).astype(np.intp)
    return _backend.kernels.block_counts(codes, rb, cb, n, kind.lut, kind.bins)


def normalize_blocks(counts: np.ndarray) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.float64)
    totals = counts.sum(axis=1, keepdims=True)
    return np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)


def feature_vector(img: GrayImage, kind, n: int) -> FeatureVector:
    """Concatenate L1-normalised block histograms in row-major block order.

    Codes come from the whole-image interior and each is credited to the
    block holding its pixel. Non-uniform GDP codes are not counted, so a
    GDP block has 8 bins; a block with no counted codes stays all zero.
    """
    kind = DescriptorKind.parse(kind)
    values = normalize_blocks(block_histograms(img, kind, n)).ravel()
    values.setflags(write=False)
    return FeatureVector(kind, n, values)


def feature_matrix(images, kind, n: int) -> np.ndarray:
    kind = DescriptorKind.parse(kind)
    out = np.empty((len(images), feature_length(kind, n)), dtype=np.float64)
    for i, img in enumerate(images):
        out[i] = feature_vector(img, kind, n).values
    return out
