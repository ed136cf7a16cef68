"""Monte Carlo BER sweeps.

Every frame draws its randomness from streams keyed by
``(seed, snr point, frame index, terminal id)``, so results do not depend
on how frames are distributed over worker processes. Frames are run in
fixed-size batches and the stopping rule is checked after each batch in
batch order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from secure_rsma import airlink, terminals
from secure_rsma.harness.config import ExperimentConfig
from secure_rsma.theory import TheoryInput, ber_total, ber_total_high_snr, db_to_linear

__all__ = ["SimulationError", "BerPoint", "BerCurve", "frame_rng", "simulate_frame", "run_experiment", "theory_curve"]

# terminal ids for stream derivation
SOURCE = 0
Z_95 = 1.959963984540054


class SimulationError(RuntimeError):
    pass


def frame_rng(seed: int, point: int, frame: int, terminal: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(point, frame, terminal))
    return np.random.Generator(np.random.PCG64(ss))


def terminal_names(cfg: ExperimentConfig) -> list[str]:
    names = ["legit", "legit_common", "legit_private", "baseline"]
    names += [e.label for e in cfg.eve_profiles]
    return names


def _check_finite(y: np.ndarray, where: str) -> None:
    if not np.all(np.isfinite(y)):
        raise SimulationError(f"non-finite samples in {where}")


def simulate_frame(
    cfg: ExperimentConfig, point: int, frame: int, variance: float
) -> tuple[np.ndarray, np.ndarray]:
    """Run one frame; return ``(errors, bits)`` in :func:`terminal_names` order."""
    plan = cfg.plan
    k_users = cfg.users
    src = frame_rng(cfg.seed, point, frame, SOURCE)
    user_bits = src.integers(0, 2, size=(k_users, plan.total_bits), dtype=np.uint8)
    if cfg.channel == "awgn":
        chans = airlink.unit_channels(variance)
    else:
        chans = airlink.rayleigh_channels(k_users, cfg.antennas, variance, src)
    if cfg.analysis_mode:
        # orthogonal slots: each stream transmits at the full budget in its own slot
        fraction, budget = 0.5, 2.0 * cfg.total_power
    else:
        fraction, budget = cfg.common_fraction, cfg.total_power
    try:
        pre = airlink.build_precoders(chans, fraction, budget, cfg.private_precoder)
    except np.linalg.LinAlgError as exc:
        raise SimulationError(f"precoder construction failed at frame {frame}: {exc}") from exc

    spec = cfg.modulation
    ortho = cfg.analysis_mode
    tx_s, truth_s = terminals.tx_frame(user_bits, plan, pre, secure=cfg.secure, modulation=spec, orthogonal=ortho)
    tx_b, truth_b = terminals.tx_frame(user_bits, plan, pre, secure=False, modulation=spec, orthogonal=ortho)
    x_s = airlink.transmit(tx_s)
    x_b = airlink.transmit(tx_b)
    n_slots = tx_s.n_slots

    names = terminal_names(cfg)
    errors = np.zeros(len(names), dtype=np.int64)
    bits = np.zeros(len(names), dtype=np.int64)

    received = []
    for k in range(k_users):
        h = chans.user_channels[k]
        noise = airlink.complex_noise(n_slots, variance, frame_rng(cfg.seed, point, frame, 1 + k))
        y_s = airlink.receive(x_s, h, variance, noise=noise)
        y_b = airlink.receive(x_b, h, variance, noise=noise)
        _check_finite(y_s, f"user {k} observation")
        received.append(y_s)
        g_c, g_p = pre.gains(h)
        rep = terminals.rx_legit(y_s, k, truth_s, (g_c, g_p[k]), sic=cfg.sic_mode)
        base = terminals.rx_legit(y_b, k, truth_b, (g_c, g_p[k]), sic=cfg.sic_mode)
        errors[:4] += (rep.errors_total, rep.errors_common, rep.errors_private, base.errors_total)
        bits[:4] += (rep.bits_total, rep.common_bits, rep.private_bits, base.bits_total)

    y_ext = None
    target = cfg.target_user
    for j, profile in enumerate(cfg.eve_profiles):
        if profile.kind == "internal":
            observer = (target + 1) % k_users
            y = received[observer]
            h = chans.user_channels[observer]
        else:
            if y_ext is None:
                noise = airlink.complex_noise(n_slots, variance, frame_rng(cfg.seed, point, frame, 1 + k_users))
                y_ext = airlink.receive(x_s, chans.eve_channel, variance, noise=noise)
                _check_finite(y_ext, "eavesdropper observation")
            y = y_ext
            h = chans.eve_channel
        g_c, _ = pre.gains(h)
        guess_rng = frame_rng(cfg.seed, point, frame, 2 + k_users + j)
        rep = terminals.rx_eve(y, target, profile, g_c, truth_s, guess_rng)
        errors[4 + j] += rep.errors_common
        bits[4 + j] += rep.common_bits
    return errors, bits


def _run_batch(cfg: ExperimentConfig, point: int, start: int, count: int, variance: float):
    errors = None
    bits = None
    for f in range(start, start + count):
        e, b = simulate_frame(cfg, point, f, variance)
        if errors is None:
            errors, bits = e, b
        else:
            errors += e
            bits += b
    return errors, bits, count


@dataclass
class BerPoint:
    snr_db: float
    frames: int
    errors: dict[str, int]
    bits: dict[str, int]
    theory_eq7: float = math.nan
    theory_eq14: float = math.nan

    def ber(self, name: str) -> float:
        n = self.bits[name]
        return self.errors[name] / n if n else math.nan

    def ci(self, name: str, z: float = Z_95) -> float:
        """Normal-approximation binomial half-width from counted bits."""
        n = self.bits[name]
        if not n:
            return math.nan
        p = self.errors[name] / n
        return z * math.sqrt(p * (1.0 - p) / n)


@dataclass
class BerCurve:
    terminals: list[str]
    points: list[BerPoint] = field(default_factory=list)

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    def ber(self, name: str) -> np.ndarray:
        return np.array([p.ber(name) for p in self.points])

    def ci(self, name: str) -> np.ndarray:
        return np.array([p.ci(name) for p in self.points])


def _theory_at(cfg: ExperimentConfig, snr_db: float) -> tuple[float, float]:
    inp = TheoryInput(cfg.plan, float(db_to_linear(snr_db)), cfg.modulation, private_norm=cfg.private_norm)
    try:
        full = ber_total(inp)
    except ZeroDivisionError:
        full = math.nan
    return full, ber_total_high_snr(inp)


def theory_curve(cfg: ExperimentConfig) -> list[tuple[float, float, float]]:
    """``(snr_db, full, high_snr)`` for every sweep point, no simulation."""
    return [(float(s), *_theory_at(cfg, float(s))) for s in cfg.snr_points]


def _done(cfg: ExperimentConfig, names: list[str], errors: np.ndarray, bits: np.ndarray, frames: int) -> bool:
    if frames >= cfg.max_frames:
        return True
    if bits[names.index("legit")] < cfg.min_bits:
        return False
    tracked = [i for i, n in enumerate(names) if n in ("legit", "baseline") or n.startswith("eve_")]
    return bool(np.all(errors[tracked] >= cfg.target_errors))


def run_experiment(cfg: ExperimentConfig, workers: int = 1, progress=None) -> BerCurve:
    """Sweep the configured SNR points and return the aggregated curve.

    ``progress``, if given, is called as ``progress(snr_db, point)`` after
    each point completes.
    """
    cfg.validate()
    names = terminal_names(cfg)
    curve = BerCurve(names)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for point, snr_db in enumerate(cfg.snr_points):
            variance = airlink.noise_variance(float(snr_db), cfg.modulation.bits_per_symbol, cfg.total_power)
            errors = np.zeros(len(names), dtype=np.int64)
            bits = np.zeros(len(names), dtype=np.int64)
            frames = 0
            batch = 0
            finished = False
            while not finished:
                wave = max(workers, 1)
                starts = [(batch + i) * cfg.batch_frames for i in range(wave)]
                jobs = []
                for s in starts:
                    if s >= cfg.max_frames:
                        break
                    n = min(cfg.batch_frames, cfg.max_frames - s)
                    if pool is None:
                        jobs.append(_run_batch(cfg, point, s, n, variance))
                    else:
                        jobs.append(pool.submit(_run_batch, cfg, point, s, n, variance))
                batch += wave
                for job in jobs:
                    e, b, n = job if pool is None else job.result()
                    errors += e
                    bits += b
                    frames += n
                    if _done(cfg, names, errors, bits, frames):
                        finished = True
                        break
            full, approx = _theory_at(cfg, float(snr_db))
            bp = BerPoint(
                snr_db=float(snr_db),
                frames=frames,
                errors=dict(zip(names, map(int, errors))),
                bits=dict(zip(names, map(int, bits))),
                theory_eq7=full,
                theory_eq14=approx,
            )
            curve.points.append(bp)
            if progress is not None:
                progress(float(snr_db), bp)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return curve
