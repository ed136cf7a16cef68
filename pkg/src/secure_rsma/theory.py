"""Closed-form bit error probabilities for the legitimate user.

All SNRs are linear per-bit SNRs. ``Pr(gamma)`` below is the exact
Gray-coded square M-QAM bit error probability averaged over the bit
positions of a symbol.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import comb, erfc

from secure_rsma.bitframe import BitFramePlan, rho
from secure_rsma.modem import QPSK, ModulationSpec, UnsupportedModulation

__all__ = [
    "TheoryInput",
    "TheoryRangeWarning",
    "qam_bit_bep",
    "ber_private",
    "prob_q_errors",
    "conditional_common_bep",
    "ber_common",
    "ber_total",
    "ber_total_high_snr",
    "db_to_linear",
]

PRIVATE_NORMS = ("normalized", "literal")


class TheoryRangeWarning(RuntimeWarning):
    """A formula evaluated outside [0, 1]; the raw value is returned."""


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def qam_bit_bep(gamma, spec: ModulationSpec = QPSK):
    """Exact Gray square M-QAM BEP at per-bit SNR ``gamma``.

    Sums, for each bit position ``k`` of one dimension, the alternating
    erfc series of the Cho-Yoon expansion and averages over the
    ``log2(sqrt(M))`` positions. For ``M = 4`` this is ``erfc(sqrt(gamma))/2``.
    """
    if not isinstance(spec, ModulationSpec):
        raise UnsupportedModulation(f"expected a ModulationSpec, got {spec!r}")
    g = np.asarray(gamma, dtype=float)
    m = spec.order
    side = spec.side
    n_pos = spec.bits_per_dim
    arg = np.sqrt(g * (3.0 * math.log2(m) / (2.0 * (m - 1))))
    total = np.zeros_like(arg)
    for k in range(1, n_pos + 1):
        w = 2 ** (k - 1)
        for i in range(int((1 - 2.0 ** (-k)) * side)):
            sign = (-1) ** ((i * w) // side)
            weight = w - math.floor(i * w / side + 0.5)
            total = total + sign * weight * erfc((2 * i + 1) * arg)
    out = total / (side * n_pos)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TheoryInput:
    """Inputs to the closed forms.

    ``snr`` is the flat per-bit SNR (linear). ``private_snr`` (length ``L``)
    and ``common_snr`` (length ``B``) optionally override it per bit.
    ``private_norm`` selects the private-average normalisation: ``"normalized"``
    divides by ``L``; ``"literal"`` divides by ``D_u'``.
    """

    plan: BitFramePlan
    snr: float
    modulation: ModulationSpec = QPSK
    private_snr: Optional[Sequence[float]] = None
    common_snr: Optional[Sequence[float]] = None
    private_norm: str = "normalized"

    def __post_init__(self) -> None:
        if self.private_norm not in PRIVATE_NORMS:
            raise ValueError(f"private_norm must be one of {PRIVATE_NORMS}")
        if not self.snr > 0:
            raise ValueError("snr must be > 0")
        for name, seq, n in (
            ("private_snr", self.private_snr, self.plan.private_len),
            ("common_snr", self.common_snr, self.plan.common_len),
        ):
            if seq is None:
                continue
            arr = np.asarray(seq, dtype=float)
            if arr.size != n:
                raise ValueError(f"{name} has {arr.size} entries, expected {n}")
            if np.any(arr <= 0):
                raise ValueError(f"{name} values must be > 0")

    @property
    def flat(self) -> bool:
        return self.private_snr is None and self.common_snr is None

    def private_bep(self) -> np.ndarray:
        if self.private_snr is None:
            return np.full(self.plan.private_len, qam_bit_bep(self.snr, self.modulation))
        return np.atleast_1d(qam_bit_bep(np.asarray(self.private_snr, float), self.modulation))

    def common_bep(self) -> np.ndarray:
        if self.common_snr is None:
            return np.full(self.plan.common_len, qam_bit_bep(self.snr, self.modulation))
        return np.atleast_1d(qam_bit_bep(np.asarray(self.common_snr, float), self.modulation))

    def indexing_bep(self) -> float:
        """Error probability of one consumed indexing bit."""
        n = self.plan.consumed_indexing_len
        if self.private_snr is None or n == 0:
            return qam_bit_bep(self.snr, self.modulation)
        return float(np.mean(self.private_bep()[:n]))


def _flag(value: float, what: str) -> float:
    if not 0.0 <= value <= 1.0:
        warnings.warn(f"{what} = {value!r} lies outside [0, 1]", TheoryRangeWarning, stacklevel=3)
    return value


def ber_private(inp: TheoryInput) -> float:
    plan = inp.plan
    if plan.private_len == 0:
        return 0.0
    s = float(np.sum(inp.private_bep()))
    if inp.private_norm == "literal":
        if plan.non_indexed_len == 0:
            raise ZeroDivisionError("literal normalisation divides by D_u' = 0")
        return _flag(s / plan.non_indexed_len, "private BEP (literal normalisation)")
    return s / plan.private_len


def prob_q_errors(l: int, n_indexing: int, p: float) -> float:
    """Binomial probability of ``l`` errors among ``n_indexing`` indexing bits."""
    if not 0 <= l <= n_indexing:
        return 0.0
    return float(comb(n_indexing, l, exact=True) * p**l * (1.0 - p) ** (n_indexing - l))


def conditional_common_bep(bep, l: int, common_len: int):
    """Common-bit BEP given ``l`` indexing errors.

    ``l`` wrong indexing bits displace ``l + 1`` of the ``B`` positions,
    each of which is then wrong with probability one half.
    """
    if l < 0 or l >= common_len:
        raise ValueError(f"l = {l} must satisfy 0 <= l <= B - 1 = {common_len - 1}")
    b = common_len
    return ((b - l - 1) / b) * np.asarray(bep) + 0.5 * (l + 1) / b


def ber_common(inp: TheoryInput) -> float:
    plan = inp.plan
    b = plan.common_len
    if b == 0:
        return 0.0
    bep = inp.common_bep()
    n_idx = plan.consumed_indexing_len
    p = inp.indexing_bep()
    total = prob_q_errors(0, n_idx, p) * float(np.mean(bep))
    for l in range(1, n_idx + 1):
        total += prob_q_errors(l, n_idx, p) * float(np.mean(conditional_common_bep(bep, l, b)))
    return total


def ber_total(inp: TheoryInput) -> float:
    r = rho(inp.plan)
    value = r * ber_private(inp)
    if r < 1.0:
        value += (1.0 - r) * ber_common(inp)
    return _flag(value, "total BEP")


def ber_total_high_snr(inp: TheoryInput) -> float:
    """High-SNR simplification for a flat SNR.

    ``[(D_u' + B Pr{q=0}) Pr + ((B - 2) Pr + 1) Pr{q=1}] / (B + L)``
    """
    if not inp.flat:
        raise ValueError("the high-SNR form needs a flat SNR")
    plan = inp.plan
    pr = qam_bit_bep(inp.snr, inp.modulation)
    n_idx = plan.consumed_indexing_len
    q0 = prob_q_errors(0, n_idx, pr)
    q1 = prob_q_errors(1, n_idx, pr)
    b = plan.common_len
    num = (plan.non_indexed_len + b * q0) * pr + ((b - 2) * pr + 1) * q1
    return _flag(num / (b + plan.private_len), "high-SNR BEP")
