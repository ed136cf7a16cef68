"""Data-dependent interleaving of a common section.

Patterns are built by sweeping adjacent swap stages over an identity
sequence; stage ``b`` exchanges entries ``b`` and ``b + 1`` when its
indexing bit (and mask flag) is set. A pattern ``Q`` uses gather
semantics: ``out[i] = in[Q[i]]``. Patterns are stored one-based.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "InterleavingPattern",
    "generate_pattern",
    "swap_count",
    "apply",
    "invert",
    "census_patterns",
    "FlipDistance",
    "flip_distance",
    "MAX_CENSUS_B",
]

MAX_CENSUS_B = 12


@dataclass(frozen=True)
class InterleavingPattern:
    """Permutation of ``1..B`` in gather form."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        mapping = tuple(int(q) for q in self.mapping)
        if sorted(mapping) != list(range(1, len(mapping) + 1)):
            raise ValueError(f"not a permutation of 1..{len(mapping)}: {mapping}")
        object.__setattr__(self, "mapping", mapping)

    @classmethod
    def identity(cls, size: int) -> "InterleavingPattern":
        return cls(tuple(range(1, size + 1)))

    @classmethod
    def from_indices(cls, indices: Sequence[int] | np.ndarray) -> "InterleavingPattern":
        """Build from zero-based gather indices."""
        return cls(tuple(int(i) + 1 for i in indices))

    @classmethod
    def parse(cls, text: str) -> "InterleavingPattern":
        """Parse the whitespace/comma separated one-based dump format."""
        return cls(tuple(int(tok) for tok in text.replace(",", " ").split()))

    @property
    def size(self) -> int:
        return len(self.mapping)

    @property
    def indices(self) -> np.ndarray:
        """Zero-based gather indices."""
        return np.asarray(self.mapping, dtype=np.intp) - 1

    def is_identity(self) -> bool:
        return all(q == i for i, q in enumerate(self.mapping, start=1))

    def __str__(self) -> str:
        return " ".join(str(q) for q in self.mapping)


def _as_bits(bits, name: str) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8).ravel()
    if arr.size and arr.max() > 1:
        raise ValueError(f"{name} must contain only 0/1")
    return arr


def _active_stages(indexing_bits, mask) -> np.ndarray:
    bits = _as_bits(indexing_bits, "indexing_bits")
    if mask is None:
        return bits.astype(bool)
    m = _as_bits(mask, "mask")
    if m.size != bits.size:
        raise ValueError(f"mask length {m.size} != indexing length {bits.size}")
    return (bits & m).astype(bool)


def generate_pattern(indexing_bits, mask=None) -> InterleavingPattern:
    """Build the interleaving pattern driven by ``B - 1`` indexing bits.

    Examples
    --------
    >>> str(generate_pattern([1, 1, 1]))
    '2 3 4 1'
    >>> str(generate_pattern([0, 1]))
    '1 3 2'
    """
    active = _active_stages(indexing_bits, mask)
    q = list(range(1, active.size + 2))
    for b in np.flatnonzero(active):
        q[b], q[b + 1] = q[b + 1], q[b]
    return InterleavingPattern(tuple(q))


def swap_count(indexing_bits, mask=None) -> int:
    """Number of exchanges performed while generating the pattern."""
    return int(_active_stages(indexing_bits, mask).sum())


def apply(pattern: InterleavingPattern, bits) -> np.ndarray:
    """Shuffle ``bits`` so that ``out[i] = bits[Q[i]]``."""
    arr = np.asarray(bits)
    if arr.shape[-1] != pattern.size:
        raise ValueError(f"pattern has size {pattern.size}, input has {arr.shape[-1]}")
    return arr[..., pattern.indices]


def invert(pattern: InterleavingPattern) -> InterleavingPattern:
    inv = np.empty(pattern.size, dtype=np.intp)
    inv[pattern.indices] = np.arange(pattern.size)
    return InterleavingPattern.from_indices(inv)


def census_patterns(common_len: int) -> int:
    """Count distinct patterns over all ``2**(B-1)`` indexing strings (full mask)."""
    if common_len < 1:
        raise ValueError("B must be >= 1")
    if common_len > MAX_CENSUS_B:
        raise ValueError(f"B = {common_len} too large for enumeration (max {MAX_CENSUS_B})")
    seen = {
        generate_pattern(bits).mapping
        for bits in itertools.product((0, 1), repeat=common_len - 1)
    }
    return len(seen)


@dataclass(frozen=True)
class FlipDistance:
    relative: InterleavingPattern
    kind: str  # "identity" | "transposition" | "other"

    @property
    def moved(self) -> int:
        return int(np.count_nonzero(self.relative.indices != np.arange(self.relative.size)))


def flip_distance(bits_a, bits_b, mask=None) -> FlipDistance:
    """Classify the relative permutation ``Q_b o Q_a^-1`` between two patterns.

    The relative permutation maps positions of ``apply(Q_a, x)`` to positions
    of ``apply(Q_b, x)``; it is returned alongside its class.
    """
    a = _as_bits(bits_a, "bits_a")
    b = _as_bits(bits_b, "bits_b")
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    qa = generate_pattern(a, mask)
    qb = generate_pattern(b, mask)
    rel = InterleavingPattern.from_indices(invert(qa).indices[qb.indices])
    moved = int(np.count_nonzero(rel.indices != np.arange(rel.size)))
    if moved == 0:
        kind = "identity"
    elif moved == 2:
        kind = "transposition"
    else:
        kind = "other"
    return FlipDistance(rel, kind)
