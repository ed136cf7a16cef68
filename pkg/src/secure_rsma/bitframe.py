"""Per-user bit partition of one frame.

A user's ``total_bits`` are split into a common section of ``common_len``
bits that gets shuffled, a private section of ``private_len`` bits whose
leading bits index the shuffle, and ``non_indexed_len`` trailing private
bits that play no part in pattern generation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "PlanError",
    "BitFramePlan",
    "FrameBits",
    "SequenceCount",
    "SearchSpace",
    "validate_plan",
    "rho",
    "sequence_count",
    "attack_search_space",
]


class PlanError(ValueError):
    """Raised when a bit partition violates one of its invariants."""


@dataclass(frozen=True)
class BitFramePlan:
    """Partition of one user's frame.

    Parameters
    ----------
    total_bits : int
        Bits carried for the user per frame.
    common_len : int
        Length of the shuffled common section.
    private_len : int
        Length of the private section that carries the indexing bits.
    indexing_len : int
        Number of private bits allotted to pattern generation.
    non_indexed_len : int
        Extra private bits never used by the interleaver.
    selection_mask : sequence of {0, 1}, optional
        One flag per swap stage (``common_len - 1`` entries). Defaults to
        all ones, i.e. every stage is active.
    interleaved_subset : int, optional
        Informational size of the selected subset. Recorded only; no
        computation reads it.
    """

    total_bits: int
    common_len: int
    private_len: int
    indexing_len: int
    non_indexed_len: int
    selection_mask: Optional[tuple[int, ...]] = None
    interleaved_subset: Optional[int] = None

    def __post_init__(self) -> None:
        if self.selection_mask is None:
            mask = (1,) * max(self.common_len - 1, 0)
        else:
            mask = tuple(int(b) for b in self.selection_mask)
        object.__setattr__(self, "selection_mask", mask)

    @property
    def mask(self) -> np.ndarray:
        return np.asarray(self.selection_mask, dtype=np.uint8)

    @property
    def private_total(self) -> int:
        """Bits placed on the private stream (``L + D_u'``)."""
        return self.private_len + self.non_indexed_len

    @property
    def consumed_indexing_len(self) -> int:
        """Indexing bits actually read by the pattern generator."""
        return min(self.indexing_len, max(self.common_len - 1, 0))

    @property
    def interleaving_enabled(self) -> bool:
        return self.common_len >= 2

    @classmethod
    def from_sections(
        cls,
        common_len: int,
        private_len: int,
        indexing_len: int,
        non_indexed_len: int,
        **kwargs,
    ) -> "BitFramePlan":
        """Build a plan whose total is the sum of its sections."""
        total = common_len + private_len + non_indexed_len
        return cls(total, common_len, private_len, indexing_len, non_indexed_len, **kwargs)


@dataclass(frozen=True)
class FrameBits:
    """Bits of one user split per a plan."""

    common_bits: np.ndarray
    private_bits: np.ndarray
    plan: BitFramePlan = field(repr=False)

    def __post_init__(self) -> None:
        common = np.asarray(self.common_bits, dtype=np.uint8)
        private = np.asarray(self.private_bits, dtype=np.uint8)
        if common.size != self.plan.common_len:
            raise PlanError(
                f"common section has {common.size} bits, plan requires {self.plan.common_len}"
            )
        if private.size != self.plan.private_total:
            raise PlanError(
                f"private section has {private.size} bits, plan requires {self.plan.private_total}"
            )
        common.setflags(write=False)
        private.setflags(write=False)
        object.__setattr__(self, "common_bits", common)
        object.__setattr__(self, "private_bits", private)

    @classmethod
    def split(cls, bits: Sequence[int] | np.ndarray, plan: BitFramePlan) -> "FrameBits":
        """Split a user's ``total_bits`` into common (leading) and private parts."""
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.size != plan.total_bits:
            raise PlanError(f"got {bits.size} bits, plan carries {plan.total_bits}")
        return cls(bits[: plan.common_len], bits[plan.common_len :], plan)

    @property
    def indexing_bits(self) -> np.ndarray:
        """Indexing vector of length ``B - 1`` for the pattern generator.

        The first ``consumed_indexing_len`` private bits are used in
        transmission order; any remaining stages receive zeros.
        """
        n_stages = max(self.plan.common_len - 1, 0)
        out = np.zeros(n_stages, dtype=np.uint8)
        used = self.plan.consumed_indexing_len
        out[:used] = self.private_bits[:used]
        return out

    def joined(self) -> np.ndarray:
        return np.concatenate([self.common_bits, self.private_bits])


def validate_plan(plan: BitFramePlan) -> BitFramePlan:
    """Return ``plan`` unchanged if consistent, else raise :class:`PlanError`."""
    counts = {
        "total_bits": plan.total_bits,
        "common_len": plan.common_len,
        "private_len": plan.private_len,
        "indexing_len": plan.indexing_len,
        "non_indexed_len": plan.non_indexed_len,
    }
    for name, value in counts.items():
        if value < 0:
            raise PlanError(f"{name} = {value} must be >= 0")
    if plan.total_bits == 0:
        raise PlanError("total_bits must be > 0")
    summed = plan.common_len + plan.private_len + plan.non_indexed_len
    if summed != plan.total_bits:
        raise PlanError(
            "totals inconsistent: common_len + private_len + non_indexed_len = "
            f"{plan.common_len}+{plan.private_len}+{plan.non_indexed_len} = {summed} "
            f"!= total_bits = {plan.total_bits}"
        )
    if plan.indexing_len > plan.private_len:
        raise PlanError(
            f"indexing_len = {plan.indexing_len} > private_len = {plan.private_len}"
        )
    expected_mask = max(plan.common_len - 1, 0)
    if len(plan.selection_mask) != expected_mask:
        raise PlanError(
            f"selection_mask length {len(plan.selection_mask)} != common_len - 1 = {expected_mask}"
        )
    if any(b not in (0, 1) for b in plan.selection_mask):
        raise PlanError("selection_mask entries must be 0 or 1")
    return plan


def rho(plan: BitFramePlan) -> float:
    """Fraction of the user's bits left uninterleaved, ``(L + D_u') / (L + D_u' + B)``."""
    private = plan.private_len + plan.non_indexed_len
    return private / (private + plan.common_len)


@dataclass(frozen=True)
class SequenceCount:
    """Number of interleaving sequences for a plan.

    ``value`` is ``2**(L_i - 1)`` capped by ``bound = min(2**L_i, B!)``.
    Both are exact integers; ``log2`` is provided for display.
    """

    value: int
    bound: int

    @property
    def log2(self) -> float:
        return math.log2(self.value)

    @property
    def bound_log2(self) -> float:
        return math.log2(self.bound)


def sequence_count(plan: BitFramePlan) -> SequenceCount:
    li = plan.indexing_len
    bound = min(2**li, math.factorial(plan.common_len))
    stated = 2 ** max(li - 1, 0)
    return SequenceCount(value=min(stated, bound), bound=bound)


@dataclass(frozen=True)
class SearchSpace:
    value: int

    @property
    def log2(self) -> float:
        return math.log2(self.value)


def attack_search_space(plan_or_b: BitFramePlan | int, indexing_len: Optional[int] = None) -> SearchSpace:
    """Candidate orderings an eavesdropper must test, ``B! / (B - L_i)!``.

    Accepts either a plan or the pair ``(B, L_i)``.
    """
    if isinstance(plan_or_b, BitFramePlan):
        b, li = plan_or_b.common_len, plan_or_b.indexing_len
    else:
        if indexing_len is None:
            raise TypeError("indexing_len is required when B is given directly")
        b, li = int(plan_or_b), int(indexing_len)
    if li < 0 or b < 0:
        raise PlanError("B and L_i must be >= 0")
    if li > b:
        raise PlanError(f"L_i = {li} exceeds B = {b}")
    return SearchSpace(math.perm(b, li))
