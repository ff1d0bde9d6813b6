"""Per-neighborhood descriptor kernels: LBP, Kirsch compass responses, GDP.

Ring order throughout is clockwise from the top-left corner::

    S1 S2 S3        NW N  NE
    S8 C  S4   ==   W  C  E
    S7 S6 S5        SW S  SE

These scalar functions are the reference definitions. Whole-image code maps
are computed by the backend kernels (see :mod:`gdpkit._backend`) and are
tested against these.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

DIRECTIONS = ("NW", "N", "NE", "E", "SE", "S", "SW", "W")

# (row, col) of each ring position inside a 3x3 patch, in ring order
RING_OFFSETS = ((0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0))

# opposite-direction ring indices compared for GDP bits b3..b0
GDP_PAIRS = ((0, 4), (1, 5), (2, 6), (3, 7))  # NW-SE, N-S, NE-SW, E-W


@dataclass(frozen=True)
class Neighborhood:
    center: float
    ring: tuple

    def __post_init__(self):
        if len(self.ring) != 8:
            raise ValueError(f"ring must have 8 entries, got {len(self.ring)}")
        object.__setattr__(self, "ring", tuple(self.ring))

    @classmethod
    def from_patch(cls, patch) -> "Neighborhood":
        """Build from a 3x3 patch given row-major (nested or flat)."""
        p = np.asarray(patch).reshape(3, 3).tolist()
        return cls(p[1][1], tuple(p[r][c] for r, c in RING_OFFSETS))

    def shifted(self, delta) -> "Neighborhood":
        return Neighborhood(self.center + delta, tuple(v + delta for v in self.ring))


class KirschResponses(NamedTuple):
    nw: float
    n: float
    ne: float
    e: float
    se: float
    s: float
    sw: float
    w: float


def kirsch_masks() -> np.ndarray:
    """The eight 3x3 compass masks, shape ``(8, 3, 3)`` in :data:`DIRECTIONS` order."""
    masks = np.full((8, 3, 3), -3, dtype=np.int64)
    masks[:, 1, 1] = 0
    for d in range(8):
        for k in (d - 1, d, d + 1):
            r, c = RING_OFFSETS[k % 8]
            masks[d, r, c] = 5
    return masks


def lbp_code(nbhd: Neighborhood) -> int:
    """8-bit LBP with S1 as the most significant bit; ties count as 1."""
    code = 0
    for s in nbhd.ring:
        code = (code << 1) | (1 if s >= nbhd.center else 0)
    return code


def kirsch_responses(nbhd: Neighborhood) -> KirschResponses:
    ring = nbhd.ring
    total = sum(ring)
    # 5*(three around d) - 3*(other five) == 8*(three around d) - 3*total
    return KirschResponses(
        *(8 * (ring[d - 1] + ring[d] + ring[(d + 1) % 8]) - 3 * total for d in range(8))
    )


def gdp_code(resp: Sequence[float]) -> int:
    """4-bit code comparing opposite compass responses (NW-SE, N-S, NE-SW, E-W)."""
    code = 0
    for a, b in GDP_PAIRS:
        code = (code << 1) | (1 if resp[a] >= resp[b] else 0)
    return code


def transition_count(code: int, bits: int = 4) -> int:
    """Adjacent bit changes reading the code MSB to LSB, non-circular."""
    if not 0 <= code < (1 << bits):
        raise ValueError(f"code {code} out of range for {bits} bits")
    return bin((code ^ (code >> 1)) & ((1 << (bits - 1)) - 1)).count("1")


def is_uniform(code: int) -> bool:
    return transition_count(code) <= 1


UNIFORM_GDP_CODES = tuple(c for c in range(16) if transition_count(c) <= 1)
_GDP_BIN = {c: i for i, c in enumerate(UNIFORM_GDP_CODES)}


def uniform_bin(code: int) -> Optional[int]:
    """Histogram bin of a uniform GDP code, or ``None`` if it is non-uniform."""
    if not 0 <= code < 16:
        raise ValueError(f"GDP code {code} out of range")
    return _GDP_BIN.get(code)


def circular_transitions(code: int, bits: int = 8) -> int:
    rotated = ((code >> 1) | ((code & 1) << (bits - 1)))
    return bin(code ^ rotated).count("1")


UNIFORM_LBP_CODES = tuple(c for c in range(256) if circular_transitions(c) <= 2)
LBP_U_NONUNIFORM_BIN = len(UNIFORM_LBP_CODES)
_LBP_U_BIN = {c: i for i, c in enumerate(UNIFORM_LBP_CODES)}


def lbp_uniform_bin(code: int) -> int:
    if not 0 <= code < 256:
        raise ValueError(f"LBP code {code} out of range")
    return _LBP_U_BIN.get(code, LBP_U_NONUNIFORM_BIN)


def _lut(mapping, size):
    lut = np.full(size, -1, dtype=np.int16)
    for code in range(size):
        b = mapping(code)
        if b is not None:
            lut[code] = b
    lut.setflags(write=False)
    return lut


#: code -> bin lookup tables; -1 marks codes that are not counted
GDP_BIN_LUT = _lut(uniform_bin, 16)
LBP_BIN_LUT = _lut(lambda c: c, 256)
LBP_U_BIN_LUT = _lut(lbp_uniform_bin, 256)
