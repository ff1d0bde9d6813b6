"""Grayscale rasters, binary PGM I/O, seeded noise and synthetic gratings."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import List

import numpy as np

#: Identifier recorded in reports for the noise/texture random source.
RNG_ALGORITHM = "numpy.random.PCG64"


class PgmError(ValueError):
    """Base class for PGM parse failures."""


class PgmMagicError(PgmError):
    pass


class PgmMaxvalError(PgmError):
    pass


class PgmDimensionError(PgmError):
    pass


class PgmTruncatedError(PgmError):
    pass


class GrayImage:
    """Immutable 8-bit single-channel raster.

    Pixels are held as a read-only ``(height, width)`` uint8 array; the
    row-major flattening of that array is the pixel sequence.
    """

    __slots__ = ("_pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D pixel array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image dimensions must be positive")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("intensities must lie in [0, 255]")
            if np.issubdtype(arr.dtype, np.floating) and not np.all(arr == np.floor(arr)):
                raise ValueError("intensities must be integers")
        arr = np.array(arr, dtype=np.uint8, copy=True)
        arr.setflags(write=False)
        self._pixels = arr

    @classmethod
    def from_sequence(cls, width: int, height: int, values) -> "GrayImage":
        values = np.asarray(values)
        if width < 1 or height < 1:
            raise ValueError("image dimensions must be positive")
        if values.size != width * height:
            raise ValueError(f"expected {width * height} pixels, got {values.size}")
        return cls(values.reshape(height, width))

    @property
    def width(self) -> int:
        return self._pixels.shape[1]

    @property
    def height(self) -> int:
        return self._pixels.shape[0]

    @property
    def pixels(self) -> np.ndarray:
        return self._pixels

    def flat(self) -> List[int]:
        return self._pixels.ravel().tolist()

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self._pixels.shape == other._pixels.shape and bool(
            np.array_equal(self._pixels, other._pixels)
        )

    def __hash__(self):
        return hash((self._pixels.shape, self._pixels.tobytes()))

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


@dataclass(frozen=True)
class NoiseSpec:
    mean: float = 0.0
    variance: float = 0.001
    seed: int = 0

    def __post_init__(self):
        if not self.variance >= 0:
            raise ValueError(f"noise variance must be >= 0, got {self.variance}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SyntheticSpec:
    images_per_class: int = 100
    image_size: int = 64
    grating_period: int = 8
    jitter_amplitude: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.images_per_class < 1:
            raise ValueError("images_per_class must be positive")
        if self.image_size < 1:
            raise ValueError("image_size must be positive")
        if not 2 <= self.grating_period <= self.image_size / 2:
            raise ValueError("grating_period must lie in [2, image_size / 2]")
        if not 0.0 <= self.jitter_amplitude <= 0.5:
            raise ValueError("jitter_amplitude must lie in [0, 0.5]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SyntheticSample:
    label: str  # "A" horizontal grating, "B" vertical grating
    image: GrayImage


# PGM header tokens: magic, width, height, maxval, separated by whitespace
# and "#" comments running to end of line.
_TOKEN = re.compile(rb"(?:\s|#[^\n\r]*)*([^\s#]+)")


def load_pgm(data: bytes) -> GrayImage:
    pos = 0
    tokens = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            if not tokens:
                raise PgmMagicError("empty input or missing magic number")
            raise PgmTruncatedError("header ends before width, height and maxval")
        tokens.append(m.group(1))
        pos = m.end()
        if len(tokens) == 1 and tokens[0] != b"P5":
            raise PgmMagicError(f"unsupported magic {tokens[0][:8]!r}; only binary P5 is read")

    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise PgmDimensionError(f"non-numeric header field: {exc}") from None
    if width <= 0 or height <= 0:
        raise PgmDimensionError(f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise PgmMaxvalError(f"maxval {maxval} not supported (need 255)")
    # exactly one whitespace byte separates maxval from the raster
    if pos >= len(data) or data[pos:pos + 1] not in (b" ", b"\t", b"\n", b"\r", b"\v", b"\f"):
        raise PgmTruncatedError("missing separator before pixel payload")
    pos += 1
    need = width * height
    payload = data[pos:pos + need]
    if len(payload) < need:
        raise PgmTruncatedError(f"expected {need} pixel bytes, found {len(payload)}")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return GrayImage(arr)


def save_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def read_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        return load_pgm(fh.read())


def write_pgm(path, img: GrayImage) -> None:
    with open(path, "wb") as fh:
        fh.write(save_pgm(img))


def round_half_away(x):
    """Round to nearest integer, ties away from zero (numpy rounds ties to even)."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def add_gaussian_noise(img: GrayImage, spec: NoiseSpec) -> GrayImage:
    """Add white Gaussian noise on the unit intensity scale.

    Each pixel becomes ``clamp(round((p/255 + n) * 255), 0, 255)`` with
    ``n ~ Normal(spec.mean, spec.variance)`` drawn from a PCG64 stream seeded
    by ``spec.seed``.
    """
    rng = np.random.default_rng(spec.seed)
    noise = rng.normal(spec.mean, math.sqrt(spec.variance), size=img.pixels.shape)
    scaled = (img.pixels.astype(np.float64) / 255.0 + noise) * 255.0
    return GrayImage(np.clip(round_half_away(scaled), 0, 255).astype(np.uint8))


def grating(size: int, period: int, phase: float, vertical: bool, jitter=None) -> np.ndarray:
    coord = np.arange(size, dtype=np.float64)
    wave = 0.5 + 0.25 * np.sin(2.0 * np.pi * (coord + phase) / period)
    field = np.tile(wave[None, :], (size, 1)) if vertical else np.tile(wave[:, None], (1, size))
    if jitter is not None:
        field = field + jitter
    return np.clip(round_half_away(255.0 * field), 0, 255).astype(np.uint8)


def make_synthetic_textures(spec: SyntheticSpec) -> List[SyntheticSample]:
    """Two-class grating corpus: class A varies along y, class B along x.

    Every image gets its own phase in ``[0, period)`` and, when the jitter
    amplitude is non-zero, independent uniform per-pixel jitter in
    ``[-a, a]`` on the unit scale.
    """
    rng = np.random.default_rng(spec.seed)
    out = []
    for label, vertical in (("A", False), ("B", True)):
        for _ in range(spec.images_per_class):
            phase = rng.uniform(0.0, spec.grating_period)
            jitter = None
            if spec.jitter_amplitude > 0:
                a = spec.jitter_amplitude
                jitter = rng.uniform(-a, a, size=(spec.image_size, spec.image_size))
            pixels = grating(spec.image_size, spec.grating_period, phase, vertical, jitter)
            out.append(SyntheticSample(label, GrayImage(pixels)))
    return out
