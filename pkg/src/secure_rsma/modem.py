"""Gray-coded square M-QAM mapping with unit average symbol energy.

Each symbol carries ``v = log2(M)`` bits: the first half select the
in-phase level and the second half the quadrature level. Per dimension,
Gray label ``g`` sits at level index ``i`` (counted from the most positive
level) with ``g = i ^ (i >> 1)``, so label 0 is the most positive level.
QPSK is the ``M = 4`` case: ``00 -> (1+1j)/sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "ModulationSpec",
    "UnsupportedModulation",
    "QPSK",
    "modulate",
    "demodulate",
    "pad_bits",
]


class UnsupportedModulation(ValueError):
    pass


@dataclass(frozen=True)
class ModulationSpec:
    order: int

    def __post_init__(self) -> None:
        m = self.order
        if m < 4 or m & (m - 1):
            raise UnsupportedModulation(f"M = {m} is not a power of two >= 4")
        if math.isqrt(m) ** 2 != m:
            raise UnsupportedModulation(f"M = {m} is not a square constellation")

    @property
    def bits_per_symbol(self) -> int:
        return self.order.bit_length() - 1

    @property
    def side(self) -> int:
        """Levels per dimension, ``sqrt(M)``."""
        return math.isqrt(self.order)

    @property
    def bits_per_dim(self) -> int:
        return self.bits_per_symbol // 2

    @property
    def scale(self) -> float:
        """Amplitude normaliser: raw levels are odd integers, energy ``2(M-1)/3``."""
        return math.sqrt(2.0 * (self.order - 1) / 3.0)

    @cached_property
    def _level_of_label(self) -> np.ndarray:
        side = self.side
        idx = np.arange(side)
        gray = idx ^ (idx >> 1)
        levels = np.empty(side, dtype=float)
        levels[gray] = (side - 1) - 2 * idx
        return levels

    @cached_property
    def _label_of_index(self) -> np.ndarray:
        idx = np.arange(self.side)
        return idx ^ (idx >> 1)

    def constellation(self) -> np.ndarray:
        """All ``M`` points, indexed by the integer value of their bit label."""
        labels = np.arange(self.order)
        bits = ((labels[:, None] >> np.arange(self.bits_per_symbol - 1, -1, -1)) & 1)
        return modulate(bits.ravel().astype(np.uint8), self)


QPSK = ModulationSpec(4)


def pad_bits(bits, bits_per_symbol: int) -> tuple[np.ndarray, int]:
    """Append zeros so the length is a multiple of ``bits_per_symbol``."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    pad = (-bits.size) % bits_per_symbol
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    return bits, pad


def _pack(groups: np.ndarray) -> np.ndarray:
    width = groups.shape[-1]
    weights = 1 << np.arange(width - 1, -1, -1)
    return groups.astype(np.int64) @ weights


def modulate(bits, spec: ModulationSpec = QPSK) -> np.ndarray:
    """Map bits to unit-energy Gray symbols.

    The bit count must be a multiple of ``spec.bits_per_symbol``; use
    :func:`pad_bits` first otherwise.
    """
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    v = spec.bits_per_symbol
    if bits.size % v:
        raise ValueError(f"{bits.size} bits is not a multiple of {v}")
    groups = bits.reshape(-1, v)
    h = spec.bits_per_dim
    table = spec._level_of_label
    re = table[_pack(groups[:, :h])]
    im = table[_pack(groups[:, h:])]
    return (re + 1j * im) / spec.scale


def _slice_dimension(x: np.ndarray, spec: ModulationSpec) -> np.ndarray:
    """Nearest-level Gray label per dimension; ties go to the lower label."""
    side = spec.side
    # fractional level index counted from the top level
    pos = ((side - 1) - x * spec.scale) / 2.0
    lo = np.clip(np.floor(pos), 0, side - 1).astype(np.intp)
    hi = np.clip(lo + 1, 0, side - 1)
    d_lo = np.abs(pos - lo)
    d_hi = np.abs(pos - hi)
    labels = spec._label_of_index
    lab_lo, lab_hi = labels[lo], labels[hi]
    pick_hi = (d_hi < d_lo) | ((d_hi == d_lo) & (lab_hi < lab_lo))
    return np.where(pick_hi, lab_hi, lab_lo)


def _unpack(labels: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width - 1, -1, -1)
    return ((labels[:, None] >> shifts) & 1).astype(np.uint8)


def demodulate(symbols, spec: ModulationSpec = QPSK) -> np.ndarray:
    """Hard minimum-distance decisions back to bits."""
    sym = np.asarray(symbols, dtype=complex).ravel()
    h = spec.bits_per_dim
    if h == 1:
        # one bit per dimension: a sign test, with 0 going to label 0
        return np.column_stack([sym.real < 0, sym.imag < 0]).astype(np.uint8).ravel()
    i_bits = _unpack(_slice_dimension(sym.real, spec), h)
    q_bits = _unpack(_slice_dimension(sym.imag, spec), h)
    return np.concatenate([i_bits, q_bits], axis=1).ravel()
