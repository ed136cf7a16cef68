"""Multi-antenna downlink: precoding, superposed transmission and reception.

Conventions: the BS has ``n_tx`` antennas and serves ``K`` single-antenna
users. Terminal ``k`` receives ``y = h_k^H x + n`` with
``n ~ CN(0, sigma^2)``. Transmit signals are ``(n_tx, T)`` complex arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "ChannelSet",
    "PrecoderSet",
    "PrecodedFrame",
    "rayleigh_channels",
    "unit_channels",
    "noise_variance",
    "build_precoders",
    "DEFAULT_COMMON_FRACTION",
    "transmit",
    "complex_noise",
    "receive",
    "stream_sinr",
]

POWER_RTOL = 1e-9
# below ~0.7 hard-decision common detection is floored by the own private stream
DEFAULT_COMMON_FRACTION = 0.8


@dataclass(frozen=True)
class ChannelSet:
    """Channel vectors of the users and of an external eavesdropper."""

    user_channels: np.ndarray  # (K, n_tx)
    eve_channel: np.ndarray  # (n_tx,)
    noise_variances: np.ndarray  # (K + 1,), last entry is the eavesdropper

    def __post_init__(self) -> None:
        users = np.atleast_2d(np.asarray(self.user_channels, dtype=complex))
        eve = np.asarray(self.eve_channel, dtype=complex).ravel()
        if eve.size != users.shape[1]:
            raise ValueError("eavesdropper channel length differs from user channels")
        nv = np.broadcast_to(np.asarray(self.noise_variances, dtype=float), (users.shape[0] + 1,)).copy()
        if np.any(nv < 0) or not np.all(np.isfinite(nv)):
            raise ValueError("noise variances must be finite and >= 0")
        object.__setattr__(self, "user_channels", users)
        object.__setattr__(self, "eve_channel", eve)
        object.__setattr__(self, "noise_variances", nv)

    @property
    def n_users(self) -> int:
        return self.user_channels.shape[0]

    @property
    def n_tx(self) -> int:
        return self.user_channels.shape[1]

    def channel(self, terminal: int) -> np.ndarray:
        """Channel of user ``terminal``; index ``n_users`` is the eavesdropper."""
        if terminal == self.n_users:
            return self.eve_channel
        return self.user_channels[terminal]


def rayleigh_channels(
    n_users: int, n_tx: int, noise_variance: float, rng: np.random.Generator
) -> ChannelSet:
    """Independent unit-variance circular complex Gaussian entries."""
    draws = (rng.standard_normal((n_users + 1, n_tx, 2)) @ np.array([1.0, 1j])) / math.sqrt(2.0)
    return ChannelSet(draws[:n_users], draws[n_users], noise_variance)


def unit_channels(noise_variance: float) -> ChannelSet:
    """Single user, single antenna, unit gain; the eavesdropper sees the same."""
    return ChannelSet(np.ones((1, 1), dtype=complex), np.ones(1, dtype=complex), noise_variance)


def noise_variance(snr_db: float, bits_per_symbol: int, total_power: float = 1.0) -> float:
    """Noise power for an average per-bit SNR: symbol SNR ``P_t / sigma^2 = v * gamma``."""
    gamma = 10.0 ** (snr_db / 10.0)
    return total_power / (bits_per_symbol * gamma)


@dataclass(frozen=True)
class PrecoderSet:
    common: np.ndarray  # (n_tx,)
    private: np.ndarray  # (K, n_tx), row k is p_k
    total_power: float
    common_fraction: float

    @property
    def matrix(self) -> np.ndarray:
        """``P = [p_c, p_1, ..., p_K]`` as an ``(n_tx, K + 1)`` array."""
        return np.column_stack([self.common, self.private.T])

    @property
    def common_power(self) -> float:
        return float(np.vdot(self.common, self.common).real)

    @property
    def private_powers(self) -> np.ndarray:
        return np.sum(np.abs(self.private) ** 2, axis=1)

    def check_budget(self) -> None:
        p = self.matrix
        used = float(np.trace(p @ p.conj().T).real)
        if used > self.total_power * (1 + POWER_RTOL):
            raise ValueError(f"precoders use {used} > budget {self.total_power}")

    def gains(self, channel: np.ndarray) -> tuple[complex, np.ndarray]:
        """Effective scalar gains ``h^H p_c`` and ``h^H p_k`` seen through ``channel``."""
        h = np.conj(np.asarray(channel, dtype=complex))
        return complex(h @ self.common), self.private @ h


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero-norm direction")
    return v / n


def build_precoders(
    channels: ChannelSet,
    common_fraction: float = DEFAULT_COMMON_FRACTION,
    total_power: float = 1.0,
    private: str = "zf",
) -> PrecoderSet:
    """Linear precoders for one coherence interval.

    Private streams use zero-forcing (``"zf"``) or matched (``"matched"``)
    directions with equal per-user power ``(1 - alpha_c) P_t / K``. The
    common stream points along the normalised sum of the users' channel
    directions with power ``alpha_c P_t``.
    """
    if not 0.0 <= common_fraction <= 1.0:
        raise ValueError("common_fraction must lie in [0, 1]")
    H = channels.user_channels.T  # (n_tx, K), column k is h_k
    n_tx, k_users = H.shape
    if private == "zf":
        if k_users > n_tx:
            raise ValueError(f"zero-forcing needs K <= n_tx (K={k_users}, n_tx={n_tx})")
        gram = H.conj().T @ H
        if np.linalg.matrix_rank(gram) < k_users:
            raise np.linalg.LinAlgError("channel matrix is rank deficient")
        directions = H @ np.linalg.inv(gram)
    elif private == "matched":
        directions = H.copy()
    else:
        raise ValueError(f"unknown private precoding strategy {private!r}")
    directions = directions / np.linalg.norm(directions, axis=0, keepdims=True)
    p_private = math.sqrt((1.0 - common_fraction) * total_power / k_users) * directions.T

    summed = sum(_unit(H[:, k]) for k in range(k_users))
    if np.linalg.norm(summed) < 1e-12 * k_users:
        summed = _unit(H[:, 0])
    p_common = math.sqrt(common_fraction * total_power) * _unit(summed)
    pre = PrecoderSet(p_common, p_private, total_power, common_fraction)
    pre.check_budget()
    return pre


@dataclass(frozen=True)
class PrecodedFrame:
    """Symbol streams and precoders for one transmission."""

    common_symbols: np.ndarray  # (T,)
    private_symbols: np.ndarray  # (K, T)
    precoders: PrecoderSet = field(repr=False)

    def __post_init__(self) -> None:
        common = np.asarray(self.common_symbols, dtype=complex).ravel()
        private = np.atleast_2d(np.asarray(self.private_symbols, dtype=complex))
        t = max(common.size, private.shape[1])
        if common.size < t:
            common = np.concatenate([common, np.zeros(t - common.size, dtype=complex)])
        if private.shape[1] < t:
            private = np.pad(private, ((0, 0), (0, t - private.shape[1])))
        object.__setattr__(self, "common_symbols", common)
        object.__setattr__(self, "private_symbols", private)

    @property
    def n_slots(self) -> int:
        return self.common_symbols.size

    @property
    def power_split(self) -> float:
        return self.precoders.common_fraction


def transmit(frame: PrecodedFrame) -> np.ndarray:
    """Superpose ``p_c s_c + sum_k p_k s_k`` for every symbol slot."""
    pre = frame.precoders
    return np.outer(pre.common, frame.common_symbols) + pre.private.T @ frame.private_symbols


def complex_noise(shape, variance: float, rng: np.random.Generator) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples of the given variance."""
    if variance == 0:
        return np.zeros(shape, dtype=complex)
    std = math.sqrt(variance / 2.0)
    return std * rng.standard_normal(shape) + 1j * std * rng.standard_normal(shape)


def receive(
    x: np.ndarray,
    channel,
    variance: float,
    rng: Optional[np.random.Generator] = None,
    noise: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Observe ``h^H x + n``.

    Pass ``noise`` to reuse a specific realisation; otherwise it is drawn
    from ``rng`` with variance ``variance``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    h = np.asarray(channel, dtype=complex).ravel()
    if h.size != x.shape[0]:
        raise ValueError(f"channel has {h.size} taps, signal has {x.shape[0]} antennas")
    clean = np.conj(h) @ x
    if noise is None:
        if variance > 0 and rng is None:
            raise ValueError("rng is required to draw noise")
        noise = complex_noise(clean.shape, variance, rng)
    return clean + noise


def stream_sinr(
    channel,
    precoders: PrecoderSet,
    variance: float,
    stream: str = "common",
    user: int = 0,
) -> float:
    """Average SINR of one stream at a terminal with channel ``channel``.

    ``stream`` is ``"common"`` (all private streams as interference),
    ``"private"`` (common and other private streams as interference) or
    ``"private_sic"`` (common removed).
    """
    g_c, g_p = precoders.gains(channel)
    pc = abs(g_c) ** 2
    pp = np.abs(g_p) ** 2
    if math.isinf(variance):
        return 0.0
    if stream == "common":
        return pc / (pp.sum() + variance)
    others = pp.sum() - pp[user]
    if stream == "private":
        return pp[user] / (pc + others + variance)
    if stream == "private_sic":
        return pp[user] / (others + variance)
    raise ValueError(f"unknown stream {stream!r}")
