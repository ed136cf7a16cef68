"""Experiment configuration in INI form.

Sections and keys (all keys optional except ``[run] seed``)::

    [plan]        total_bits, common_len, private_len, indexing_len,
                  non_indexed_len, selection_mask (all | 0/1 string),
                  interleaved_subset
    [topology]    users, antennas, channel (rayleigh | awgn),
                  analysis_mode, private_precoder (zf | matched)
    [modulation]  order
    [power]       total_power, common_fraction
    [sweep]       start_db, stop_db, step_db
    [eavesdroppers] profiles (kind:knowledge, ...), target_user
    [trials]      min_bits, max_frames, target_errors, batch_frames
    [run]         seed, secure, sic_mode (hard | genie),
                  private_norm (normalized | literal)
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from secure_rsma.airlink import DEFAULT_COMMON_FRACTION
from secure_rsma.bitframe import BitFramePlan, PlanError, validate_plan
from secure_rsma.modem import ModulationSpec, UnsupportedModulation
from secure_rsma.terminals import EveProfile

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "load_config", "reference_config"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    plan: BitFramePlan = field(default_factory=lambda: BitFramePlan(100, 25, 50, 25, 25))
    users: int = 2
    antennas: int = 4
    channel: str = "rayleigh"
    analysis_mode: bool = False
    private_precoder: str = "zf"
    modulation_order: int = 4
    total_power: float = 1.0
    common_fraction: float = DEFAULT_COMMON_FRACTION
    start_db: float = -10.0
    stop_db: float = 20.0
    step_db: float = 1.0
    eve_profiles: tuple[EveProfile, ...] = (
        EveProfile("internal", 0.0),
        EveProfile("internal", 0.5),
        EveProfile("internal", 0.75),
        EveProfile("external", 0.0),
    )
    target_user: int = 0
    min_bits: int = 1_000_000
    max_frames: int = 20_000
    target_errors: int = 100
    batch_frames: int = 250
    secure: bool = True
    sic_mode: str = "hard"
    private_norm: str = "normalized"

    def __post_init__(self) -> None:
        if self.analysis_mode:
            object.__setattr__(self, "users", 1)
            object.__setattr__(self, "antennas", 1)
            object.__setattr__(self, "channel", "awgn")

    @property
    def modulation(self) -> ModulationSpec:
        return ModulationSpec(self.modulation_order)

    @property
    def snr_points(self) -> np.ndarray:
        n = int(np.floor((self.stop_db - self.start_db) / self.step_db + 1e-9)) + 1
        return np.round(self.start_db + self.step_db * np.arange(n), 10)

    @property
    def bits_per_frame(self) -> int:
        return self.users * self.plan.total_bits

    def replace(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    def validate(self) -> "ExperimentConfig":
        """Return self if every setting is usable, else raise :class:`ConfigError`."""
        try:
            validate_plan(self.plan)
            self.modulation
        except (PlanError, UnsupportedModulation) as exc:
            raise ConfigError(str(exc)) from exc
        checks = [
            (self.step_db > 0, f"step_db = {self.step_db} must be > 0"),
            (self.start_db <= self.stop_db, "start_db must be <= stop_db"),
            (self.min_bits >= 10_000, f"min_bits = {self.min_bits} must be >= 10^4"),
            (self.users >= 1, "users must be >= 1"),
            (self.antennas >= 1, "antennas must be >= 1"),
            (self.channel in ("rayleigh", "awgn"), f"unknown channel model {self.channel!r}"),
            (self.private_precoder in ("zf", "matched"), f"unknown precoder {self.private_precoder!r}"),
            (
                self.private_precoder != "zf" or self.users <= self.antennas,
                "zero-forcing needs users <= antennas",
            ),
            (self.channel == "rayleigh" or self.antennas == 1, "awgn channel needs antennas = 1"),
            (0.0 <= self.common_fraction <= 1.0, "common_fraction must lie in [0, 1]"),
            (self.total_power > 0, "total_power must be > 0"),
            (0 <= self.target_user < self.users, "target_user out of range"),
            (self.max_frames >= 1 and self.batch_frames >= 1, "max_frames and batch_frames must be >= 1"),
            (self.target_errors >= 1, "target_errors must be >= 1"),
            (
                self.max_frames * self.bits_per_frame >= self.min_bits,
                f"max_frames * bits_per_frame = {self.max_frames * self.bits_per_frame} "
                f"cannot reach min_bits = {self.min_bits}",
            ),
            (self.sic_mode in ("hard", "genie"), f"unknown sic_mode {self.sic_mode!r}"),
            (self.private_norm in ("normalized", "literal"), f"unknown private_norm {self.private_norm!r}"),
            (not isinstance(self.seed, bool) and isinstance(self.seed, int) and self.seed >= 0,
             "seed must be a non-negative integer"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        return self

    def to_ini(self) -> str:
        p = self.plan
        cp = configparser.ConfigParser()
        cp["plan"] = {
            "total_bits": str(p.total_bits),
            "common_len": str(p.common_len),
            "private_len": str(p.private_len),
            "indexing_len": str(p.indexing_len),
            "non_indexed_len": str(p.non_indexed_len),
            "selection_mask": "all" if all(p.selection_mask) else "".join(map(str, p.selection_mask)),
        }
        if p.interleaved_subset is not None:
            cp["plan"]["interleaved_subset"] = str(p.interleaved_subset)
        cp["topology"] = {
            "users": str(self.users),
            "antennas": str(self.antennas),
            "channel": self.channel,
            "analysis_mode": str(self.analysis_mode).lower(),
            "private_precoder": self.private_precoder,
        }
        cp["modulation"] = {"order": str(self.modulation_order)}
        cp["power"] = {"total_power": repr(self.total_power), "common_fraction": repr(self.common_fraction)}
        cp["sweep"] = {"start_db": repr(self.start_db), "stop_db": repr(self.stop_db), "step_db": repr(self.step_db)}
        cp["eavesdroppers"] = {
            "profiles": ", ".join(f"{e.kind}:{e.zeta_knowledge:g}" for e in self.eve_profiles),
            "target_user": str(self.target_user),
        }
        cp["trials"] = {
            "min_bits": str(self.min_bits),
            "max_frames": str(self.max_frames),
            "target_errors": str(self.target_errors),
            "batch_frames": str(self.batch_frames),
        }
        cp["run"] = {
            "seed": str(self.seed),
            "secure": str(self.secure).lower(),
            "sic_mode": self.sic_mode,
            "private_norm": self.private_norm,
        }
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _profiles(text: str) -> tuple[EveProfile, ...]:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        kind, _, knowledge = item.partition(":")
        try:
            out.append(EveProfile(kind.strip(), float(knowledge or 0.0)))
        except ValueError as exc:
            raise ConfigError(f"bad eavesdropper profile {item!r}: {exc}") from exc
    return tuple(out)


def parse_config(text: str, seed: Optional[int] = None) -> ExperimentConfig:
    """Parse INI text; ``seed`` overrides ``[run] seed`` when given."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    known = {"plan", "topology", "modulation", "power", "sweep", "eavesdroppers", "trials", "run"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")

    defaults = ExperimentConfig(seed=0)
    kw: dict = {}

    def get(section, key, conv, dest=None):
        if cp.has_option(section, key):
            raw = cp.get(section, key)
            try:
                kw[dest or key] = conv(raw) if conv is not bool else cp.getboolean(section, key)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc

    try:
        if cp.has_section("plan"):
            sec = cp["plan"]
            dp = defaults.plan
            common = sec.getint("common_len", dp.common_len)
            private = sec.getint("private_len", dp.private_len)
            non_idx = sec.getint("non_indexed_len", dp.non_indexed_len)
            total = sec.getint("total_bits", common + private + non_idx)
            mask_text = sec.get("selection_mask", "all").strip()
            mask = None if mask_text.lower() in ("all", "") else tuple(int(c) for c in mask_text)
            subset = sec.get("interleaved_subset", "").strip()
            kw["plan"] = BitFramePlan(
                total,
                common,
                private,
                sec.getint("indexing_len", dp.indexing_len),
                non_idx,
                selection_mask=mask,
                interleaved_subset=int(subset) if subset else None,
            )
    except ValueError as exc:
        raise ConfigError(f"[plan]: {exc}") from exc

    get("topology", "users", int)
    get("topology", "antennas", int)
    get("topology", "channel", str.strip)
    get("topology", "analysis_mode", bool)
    get("topology", "private_precoder", str.strip)
    get("modulation", "order", int, "modulation_order")
    get("power", "total_power", float)
    get("power", "common_fraction", float)
    get("sweep", "start_db", float)
    get("sweep", "stop_db", float)
    get("sweep", "step_db", float)
    get("eavesdroppers", "profiles", _profiles, "eve_profiles")
    get("eavesdroppers", "target_user", int)
    get("trials", "min_bits", int)
    get("trials", "max_frames", int)
    get("trials", "target_errors", int)
    get("trials", "batch_frames", int)
    get("run", "seed", int)
    get("run", "secure", bool)
    get("run", "sic_mode", str.strip)
    get("run", "private_norm", str.strip)

    if seed is not None:
        kw["seed"] = seed
    if "seed" not in kw:
        raise ConfigError("no seed given: set [run] seed or pass --seed")
    return ExperimentConfig(**kw).validate()


def load_config(path: str | Path, seed: Optional[int] = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, seed=seed)


def reference_config(seed: int, **changes) -> ExperimentConfig:
    """The reference scenario: 100 bits per user split 25/50/25, QPSK, -10..20 dB."""
    return ExperimentConfig(seed=seed, **changes).validate()
