import math

import numpy as np
import pytest

from secure_rsma.airlink import (
    ChannelSet,
    PrecodedFrame,
    build_precoders,
    complex_noise,
    noise_variance,
    rayleigh_channels,
    receive,
    stream_sinr,
    transmit,
    unit_channels,
)


def test_scalar_channel_precoders():
    ch = ChannelSet(np.array([[1.0]]), np.array([1.0]), 1.0)
    pre = build_precoders(ch, common_fraction=0.5, total_power=2.0)
    assert pre.common == pytest.approx([1.0])
    assert pre.private[0] == pytest.approx([1.0])


def test_zf_on_orthogonal_channels_is_matched():
    ch = ChannelSet(np.eye(2, dtype=complex), np.zeros(2), 1.0)
    pre = build_precoders(ch, 0.5, 1.0, "zf")
    assert abs(pre.private[0, 1]) < 1e-12 and abs(pre.private[1, 0]) < 1e-12
    assert np.allclose(np.abs(pre.private), np.sqrt(0.25) * np.eye(2))


@pytest.mark.parametrize("seed", range(20))
def test_zf_nulls_cross_terms(seed):
    rng = np.random.default_rng(seed)
    ch = rayleigh_channels(2, 4, 1.0, rng)
    pre = build_precoders(ch, 0.8, 1.0, "zf")
    for j in range(2):
        for k in range(2):
            if j != k:
                h, p = ch.user_channels[j], pre.private[k]
                assert abs(np.vdot(h, p)) <= 1e-9 * np.linalg.norm(h) * np.linalg.norm(p)


@pytest.mark.parametrize("strategy", ["zf", "matched"])
@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.5, 0.8, 1.0])
def test_power_budget(strategy, alpha):
    rng = np.random.default_rng(3)
    for _ in range(50):
        pre = build_precoders(rayleigh_channels(3, 4, 1.0, rng), alpha, 2.5, strategy)
        p = pre.matrix
        used = np.trace(p @ p.conj().T).real
        assert used <= 2.5 * (1 + 1e-9)
        assert pre.common_power == pytest.approx(alpha * 2.5)
        assert pre.private_powers == pytest.approx(np.full(3, (1 - alpha) * 2.5 / 3))


def test_zf_rank_deficient():
    h = np.array([[1, 1j, 0], [2, 2j, 0]])
    with pytest.raises(np.linalg.LinAlgError):
        build_precoders(ChannelSet(h, np.zeros(3), 1.0), 0.5)


def test_zf_needs_enough_antennas():
    with pytest.raises(ValueError):
        build_precoders(ChannelSet(np.ones((3, 2)), np.zeros(2), 1.0), 0.5)


def test_transmit_orthogonal_superposition():
    from secure_rsma.airlink import PrecoderSet

    pre = PrecoderSet(np.array([1, 0]), np.array([[0, 1]]), 2.0, 0.5)
    x = transmit(PrecodedFrame(np.array([1.0]), np.array([[1j]]), pre))
    assert x[:, 0] == pytest.approx([1, 1j])
    x0 = transmit(PrecodedFrame(np.array([1.0, -1.0]), np.zeros((1, 2)), pre))
    assert np.allclose(x0, np.outer(pre.common, [1, -1]))


def test_transmit_pads_short_streams():
    from secure_rsma.airlink import PrecoderSet

    pre = PrecoderSet(np.array([1.0]), np.array([[1.0]]), 2.0, 0.5)
    f = PrecodedFrame(np.array([1.0]), np.array([[1.0, 1.0, 1.0]]), pre)
    assert f.n_slots == 3 and f.common_symbols.tolist() == [1, 0, 0]


def test_transmit_power_accounting():
    rng = np.random.default_rng(11)
    ch = rayleigh_channels(2, 4, 1.0, rng)
    pre = build_precoders(ch, 0.7, 1.0)
    n = 10_000
    qpsk = lambda size: (rng.choice([-1, 1], size) + 1j * rng.choice([-1, 1], size)) / math.sqrt(2)
    x = transmit(PrecodedFrame(qpsk(n), qpsk((2, n)), pre))
    expected = pre.common_power + pre.private_powers.sum()
    assert np.mean(np.sum(np.abs(x) ** 2, axis=0)) == pytest.approx(expected, rel=0.03)


def test_receive_noiseless_projection():
    x = np.arange(6).reshape(2, 3) + 1j
    assert receive(x, [1, 0], 0.0) == pytest.approx(x[0])


def test_receive_noise_variance():
    rng = np.random.default_rng(5)
    y = receive(np.zeros((1, 100_000)), [1.0], 0.3, rng)
    assert np.var(y) == pytest.approx(0.3, rel=0.03)
    assert abs(np.mean(y)) < 4 * math.sqrt(0.3 / 100_000)


def test_receive_linearity():
    rng = np.random.default_rng(6)
    x1, x2 = rng.standard_normal((2, 2, 5))
    h = np.array([0.3 + 1j, -2])
    n = complex_noise(5, 1.0, rng)
    lhs = receive(x1 + x2, h, 1.0, noise=n)
    rhs = receive(x1, h, 1.0, noise=n) + receive(x2, h, 1.0, noise=np.zeros(5))
    assert lhs == pytest.approx(rhs)


def test_analysis_mode_is_plain_awgn():
    ch = unit_channels(0.5)
    pre = build_precoders(ch, 0.5, 2.0)
    s = np.array([1 + 1j, -1 - 1j]) / math.sqrt(2)
    n = np.array([0.1, -0.2j])
    y = receive(transmit(PrecodedFrame(s, np.zeros((1, 2)), pre)), ch.user_channels[0], 0.5, noise=n)
    assert y == pytest.approx(s + n)


def test_rayleigh_second_moment():
    rng = np.random.default_rng(8)
    ch = rayleigh_channels(1, 100_000, 1.0, rng)
    h = ch.user_channels[0]
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, rel=0.02)
    assert abs(np.mean(h**2)) < 0.02  # circular


class TestStreamSinr:
    def test_scalar(self):
        ch = ChannelSet(np.array([[1.0]]), np.array([1.0]), 1.0)
        pre = build_precoders(ch, 0.5, 2.0)
        assert stream_sinr(ch.user_channels[0], pre, 1.0, "common") == pytest.approx(0.5)

    def test_zf_post_sic_is_interference_free(self):
        rng = np.random.default_rng(9)
        ch = rayleigh_channels(2, 4, 1.0, rng)
        pre = build_precoders(ch, 0.5, 1.0, "zf")
        for k in range(2):
            h = ch.user_channels[k]
            expected = abs(np.vdot(h, pre.private[k])) ** 2 / 0.1
            assert stream_sinr(h, pre, 0.1, "private_sic", k) == pytest.approx(expected, rel=1e-9)

    def test_noise_limit(self):
        ch = ChannelSet(np.array([[1.0]]), np.array([1.0]), 1.0)
        pre = build_precoders(ch, 0.5, 2.0)
        for stream in ("common", "private", "private_sic"):
            assert stream_sinr(ch.user_channels[0], pre, 1e12, stream) < 1e-11
            assert stream_sinr(ch.user_channels[0], pre, math.inf, stream) == 0.0


def test_noise_variance_for_per_bit_snr():
    assert noise_variance(0.0, 2) == pytest.approx(0.5)
    assert noise_variance(10.0, 4, total_power=2.0) == pytest.approx(0.05)
