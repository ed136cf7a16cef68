"""Per-frame transmitter, legitimate receiver and eavesdropper chains.

Transmitter, per user: split the bits per the plan, derive the pattern
from the leading private bits, shuffle the common section, then
concatenate all users' common sections (user order) into one common
stream. Common and private streams are Gray-mapped and precoded.

Legitimate receiver: demodulate the common stream, cancel it, demodulate
the own private stream, rebuild the pattern from the decoded private bits
and only then undo the shuffle on the own common section.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from secure_rsma.airlink import PrecodedFrame, PrecoderSet
from secure_rsma.bitframe import BitFramePlan, FrameBits, PlanError
from secure_rsma.interleaver import (
    InterleavingPattern,
    apply,
    generate_pattern,
    invert,
)
from secure_rsma.modem import QPSK, ModulationSpec, demodulate, modulate, pad_bits

__all__ = [
    "FrameLayout",
    "FrameTruth",
    "ReceiverReport",
    "EveProfile",
    "frame_layout",
    "pattern_for",
    "tx_frame",
    "rx_legit",
    "rx_eve",
    "eve_guess_pattern",
    "refresh_policy",
    "carry_noise_with_bits",
]

SIC_MODES = ("hard", "genie")


@dataclass(frozen=True)
class FrameLayout:
    """Slot map of one frame; known to every receiver."""

    plan: BitFramePlan
    modulation: ModulationSpec
    n_users: int
    orthogonal: bool
    common_pad: int
    private_pad: int

    @property
    def common_stream_bits(self) -> int:
        return self.n_users * self.plan.common_len

    @property
    def n_common_slots(self) -> int:
        return (self.common_stream_bits + self.common_pad) // self.modulation.bits_per_symbol

    @property
    def n_private_slots(self) -> int:
        return (self.plan.private_total + self.private_pad) // self.modulation.bits_per_symbol

    @property
    def common_slots(self) -> slice:
        return slice(0, self.n_common_slots)

    @property
    def private_slots(self) -> slice:
        start = self.n_common_slots if self.orthogonal else 0
        return slice(start, start + self.n_private_slots)

    @property
    def n_slots(self) -> int:
        if self.orthogonal:
            return self.n_common_slots + self.n_private_slots
        return max(self.n_common_slots, self.n_private_slots)

    def common_section(self, user: int) -> slice:
        b = self.plan.common_len
        return slice(user * b, (user + 1) * b)


def frame_layout(
    plan: BitFramePlan,
    n_users: int,
    modulation: ModulationSpec = QPSK,
    orthogonal: bool = False,
) -> FrameLayout:
    """Slot layout for ``n_users`` users.

    With ``orthogonal=True`` the private streams follow the common stream
    in time instead of being superposed on it.
    """
    v = modulation.bits_per_symbol
    return FrameLayout(
        plan=plan,
        modulation=modulation,
        n_users=n_users,
        orthogonal=orthogonal,
        common_pad=(-(n_users * plan.common_len)) % v,
        private_pad=(-plan.private_total) % v,
    )


@dataclass(frozen=True)
class FrameTruth:
    """Ground truth retained by the transmitter for scoring."""

    layout: FrameLayout
    frames: tuple[FrameBits, ...]
    patterns: tuple[InterleavingPattern, ...]
    common_stream: np.ndarray  # interleaved common sections + padding
    private_streams: np.ndarray  # (K, private_total + pad)
    secure: bool
    tx: PrecodedFrame = field(repr=False)


def pattern_for(frame: FrameBits) -> InterleavingPattern:
    """Pattern derived from a frame's own private bits."""
    plan = frame.plan
    if plan.common_len == 0:
        return InterleavingPattern.identity(0)
    return generate_pattern(frame.indexing_bits, plan.mask)


def refresh_policy(frame_index: int) -> bool:
    """Whether frame ``frame_index`` derives a fresh pattern: always.

    Every frame builds its pattern from the private bits it carries, so
    no pattern outlives its coherence interval.
    """
    if frame_index < 0:
        raise ValueError("frame_index must be >= 0")
    return True


def tx_frame(
    user_bits: Sequence[np.ndarray] | np.ndarray,
    plan: BitFramePlan,
    precoders: PrecoderSet,
    *,
    secure: bool = True,
    modulation: ModulationSpec = QPSK,
    orthogonal: bool = False,
) -> tuple[PrecodedFrame, FrameTruth]:
    """Build the transmission for one frame."""
    user_bits = np.atleast_2d(np.asarray(user_bits, dtype=np.uint8))
    k_users = user_bits.shape[0]
    if precoders.private.shape[0] != k_users:
        raise PlanError(f"{k_users} users but {precoders.private.shape[0]} private precoders")
    layout = frame_layout(plan, k_users, modulation, orthogonal)

    frames = tuple(FrameBits.split(bits, plan) for bits in user_bits)
    if secure:
        patterns = tuple(pattern_for(f) for f in frames)
    else:
        patterns = tuple(InterleavingPattern.identity(plan.common_len) for _ in frames)

    common = np.concatenate(
        [apply(q, f.common_bits) for q, f in zip(patterns, frames)]
        + [np.zeros(layout.common_pad, dtype=np.uint8)]
    )
    private = np.stack([pad_bits(f.private_bits, modulation.bits_per_symbol)[0] for f in frames])

    n = layout.n_slots
    s_c = np.zeros(n, dtype=complex)
    s_p = np.zeros((k_users, n), dtype=complex)
    if layout.n_common_slots:
        s_c[layout.common_slots] = modulate(common, modulation)
    if layout.n_private_slots:
        for k in range(k_users):
            s_p[k, layout.private_slots] = modulate(private[k], modulation)
    tx = PrecodedFrame(s_c, s_p, precoders)
    truth = FrameTruth(layout, frames, patterns, common, private, secure, tx)
    return tx, truth


@dataclass(frozen=True)
class ReceiverReport:
    decoded_common_bits: np.ndarray
    decoded_private_bits: np.ndarray
    errors_common: int
    errors_private: int
    errors_indexing: int
    pattern_match: bool
    sic_residual_power: float = 0.0

    @property
    def common_bits(self) -> int:
        return int(self.decoded_common_bits.size)

    @property
    def private_bits(self) -> int:
        return int(self.decoded_private_bits.size)

    @property
    def errors_total(self) -> int:
        return self.errors_common + self.errors_private

    @property
    def bits_total(self) -> int:
        return self.common_bits + self.private_bits


def _equalize(y: np.ndarray, gain: complex) -> np.ndarray:
    if gain == 0:
        return np.zeros_like(y)
    return y / gain


def _demod_common(y: np.ndarray, layout: FrameLayout, gain_c: complex) -> np.ndarray:
    if layout.n_common_slots == 0:
        return np.zeros(0, dtype=np.uint8)
    return demodulate(_equalize(y[layout.common_slots], gain_c), layout.modulation)


def rx_legit(
    y: np.ndarray,
    user: int,
    truth: FrameTruth,
    gains: tuple[complex, complex],
    sic: str = "hard",
) -> ReceiverReport:
    """Decode user ``user``'s frame from its observation ``y``.

    ``gains`` are the user's effective scalar gains ``(h^H p_c, h^H p_k)``.
    ``truth`` supplies the layout, the transmitted common symbols for
    ``sic="genie"``, and the reference bits for scoring.
    """
    if sic not in SIC_MODES:
        raise ValueError(f"unknown SIC mode {sic!r}")
    layout = truth.layout
    plan = layout.plan
    spec = layout.modulation
    g_c, g_p = gains
    y = np.asarray(y, dtype=complex)

    common_hat = _demod_common(y, layout, g_c)

    residual = y.copy()
    cs = layout.common_slots
    if layout.n_common_slots:
        true_contrib = g_c * truth.tx.common_symbols[cs]
        if sic == "genie":
            cancel = true_contrib
        else:
            cancel = g_c * modulate(common_hat, spec)
        residual[cs] -= cancel
        sic_residual = float(np.mean(np.abs(true_contrib - cancel) ** 2))
    else:
        sic_residual = 0.0

    if layout.n_private_slots:
        private_hat = demodulate(_equalize(residual[layout.private_slots], g_p), spec)
    else:
        private_hat = np.zeros(0, dtype=np.uint8)
    private_hat = private_hat[: plan.private_total]

    mine = truth.frames[user]
    # rebuild the pattern from what was decoded, then undo the shuffle
    decoded_frame = FrameBits(common_hat[layout.common_section(user)], private_hat, plan)
    if truth.secure:
        q_hat = pattern_for(decoded_frame)
    else:
        q_hat = InterleavingPattern.identity(plan.common_len)
    own_common = apply(invert(q_hat), decoded_frame.common_bits)

    used = plan.consumed_indexing_len
    active = plan.mask[:used].astype(bool)
    idx_err = (private_hat[:used] != mine.private_bits[:used]) & active
    return ReceiverReport(
        decoded_common_bits=own_common,
        decoded_private_bits=private_hat,
        errors_common=int(np.count_nonzero(own_common != mine.common_bits)),
        errors_private=int(np.count_nonzero(private_hat != mine.private_bits)),
        errors_indexing=int(np.count_nonzero(idx_err)),
        pattern_match=q_hat == truth.patterns[user],
        sic_residual_power=sic_residual,
    )


@dataclass(frozen=True)
class EveProfile:
    """Passive eavesdropper.

    ``kind`` is ``"internal"`` (another served user) or ``"external"``
    (a non-subscriber with its own channel). ``zeta_knowledge`` is the
    fraction of output positions whose true source index is known.
    """

    kind: str = "external"
    zeta_knowledge: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("internal", "external"):
            raise ValueError(f"unknown eavesdropper kind {self.kind!r}")
        if not 0.0 <= self.zeta_knowledge <= 1.0:
            raise ValueError("zeta_knowledge must lie in [0, 1]")

    @property
    def label(self) -> str:
        return f"eve_{self.kind}_k{self.zeta_knowledge:g}"


def eve_guess_pattern(
    true_pattern: InterleavingPattern, knowledge: float, rng: np.random.Generator
) -> InterleavingPattern:
    """Eavesdropper's best ordering given partial side information.

    The true source of ``floor(knowledge * B)`` uniformly chosen output
    positions is known; the remaining positions get a uniformly random
    bijection onto the remaining sources.
    """
    b = true_pattern.size
    q = true_pattern.indices
    n_known = min(b, math.floor(knowledge * b + 1e-9))
    order = rng.permutation(b)
    unknown = np.sort(order[n_known:])
    guess = q.copy()
    guess[unknown] = rng.permutation(q[unknown])
    return InterleavingPattern.from_indices(guess)


def rx_eve(
    y: np.ndarray,
    target: int,
    profile: EveProfile,
    gain_c: complex,
    truth: FrameTruth,
    rng: np.random.Generator,
) -> ReceiverReport:
    """Recover user ``target``'s common bits as a passive eavesdropper.

    The eavesdropper demodulates the common stream through its own gain
    ``gain_c`` but has no access to the target's private stream; the
    shuffle is undone with :func:`eve_guess_pattern`.
    """
    layout = truth.layout
    common_hat = _demod_common(np.asarray(y, dtype=complex), layout, gain_c)
    section = common_hat[layout.common_section(target)]
    q_true = truth.patterns[target]
    guess = eve_guess_pattern(q_true, profile.zeta_knowledge, rng)
    recovered = apply(invert(guess), section)
    ref = truth.frames[target].common_bits
    return ReceiverReport(
        decoded_common_bits=recovered,
        decoded_private_bits=np.zeros(0, dtype=np.uint8),
        errors_common=int(np.count_nonzero(recovered != ref)),
        errors_private=0,
        errors_indexing=0,
        pattern_match=guess == q_true,
    )


def _common_gather(truth: FrameTruth) -> np.ndarray:
    """Source index (in plain concatenated order) of every common-stream bit."""
    layout = truth.layout
    b = layout.plan.common_len
    parts = [k * b + q.indices for k, q in enumerate(truth.patterns)]
    tail = np.arange(layout.common_stream_bits, layout.common_stream_bits + layout.common_pad)
    return np.concatenate(parts + [tail]).astype(np.intp)


def carry_noise_with_bits(noise: np.ndarray, truth: FrameTruth, gain_c: complex) -> np.ndarray:
    """Re-seat a baseline noise realisation so it follows the common bits.

    Given the noise ``noise`` that hit an unshuffled frame, return the
    realisation under which every common source bit of the shuffled frame
    ``truth`` sees the same (equalised) noise sample on its own dimension.
    Private slots are left untouched. Only one bit per dimension (QPSK)
    keeps per-bit error events separable, so other orders are rejected.
    """
    layout = truth.layout
    if layout.modulation.bits_per_dim != 1:
        raise ValueError("bit-aligned noise needs one bit per dimension (QPSK)")
    out = np.array(noise, dtype=complex, copy=True)
    cs = layout.common_slots
    if layout.n_common_slots == 0 or gain_c == 0:
        return out
    w = out[cs] / gain_c
    per_bit = np.column_stack([w.real, w.imag]).ravel()
    moved = per_bit[_common_gather(truth)].reshape(-1, 2)
    out[cs] = gain_c * (moved[:, 0] + 1j * moved[:, 1])
    return out
