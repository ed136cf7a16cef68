import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from secure_rsma.harness import (
    BerCurve,
    ConfigError,
    emit_csv,
    format_csv,
    load_config,
    reference_config,
    parse_config,
    run_experiment,
)
from secure_rsma.harness.cli import main
from secure_rsma.harness.engine import simulate_frame, terminal_names

DATA = Path(__file__).parent / "data"
ROOT = Path(__file__).parents[1]


class TestConfig:
    def test_reference_file(self):
        cfg = load_config(ROOT / "configs" / "reference.ini")
        p = cfg.plan
        assert (p.total_bits, p.common_len, p.private_len, p.indexing_len, p.non_indexed_len) == (100, 25, 50, 25, 25)
        assert cfg.snr_points.tolist() == list(range(-10, 21))
        assert cfg.modulation.order == 4
        assert [e.label for e in cfg.eve_profiles] == [
            "eve_internal_k0",
            "eve_internal_k0.5",
            "eve_internal_k0.75",
            "eve_external_k0",
        ]

    def test_analysis_mode_forces_single_link(self):
        cfg = load_config(ROOT / "configs" / "analysis.ini")
        assert (cfg.users, cfg.antennas, cfg.channel, cfg.sic_mode) == (1, 1, "awgn", "genie")

    def test_roundtrip_ini(self):
        cfg = reference_config(3, common_fraction=0.7, private_norm="literal")
        assert parse_config(cfg.to_ini()) == cfg

    def test_seed_required(self):
        with pytest.raises(ConfigError, match="seed"):
            parse_config("[sweep]\nstart_db = 0\n")
        assert parse_config("[sweep]\nstart_db = 0\n", seed=4).seed == 4

    @pytest.mark.parametrize(
        "text, match",
        [
            ("[sweep]\nstep_db = 0", "step_db"),
            ("[sweep]\nstart_db = 5\nstop_db = 1", "start_db"),
            ("[trials]\nmin_bits = 100", "min_bits"),
            ("[plan]\ncommon_len = 30\ntotal_bits = 100", "totals inconsistent"),
            ("[modulation]\norder = 8", "square"),
            ("[topology]\nusers = 5", "zero-forcing"),
            ("[eavesdroppers]\nprofiles = jammer:0", "profile"),
            ("[bogus]\nx = 1", "unknown section"),
            ("[run]\nsic_mode = soft", "sic_mode"),
            ("[trials]\nmax_frames = 10", "cannot reach"),
            ("not an ini", "malformed"),
        ],
    )
    def test_invalid(self, text, match):
        with pytest.raises(ConfigError, match=match):
            parse_config(text, seed=1)


class TestCsv:
    def test_empty_sweep_is_header_only(self):
        text = format_csv(BerCurve(["legit"]))
        assert text == "snr_db,bits,legit_ber,legit_ci,theory_eq7,theory_eq14\n"

    def test_single_point(self, tmp_path):
        cfg = reference_config(1, start_db=5, stop_db=5, min_bits=10_000, max_frames=60, batch_frames=20)
        path = emit_csv(run_experiment(cfg), tmp_path / "one.csv")
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().splitlines()
        assert len(lines) == 2
        header = lines[0].split(",")
        assert header[:2] == ["snr_db", "bits"] and header[-2:] == ["theory_eq7", "theory_eq14"]
        assert len(lines[1].split(",")) == len(header)

    def test_six_significant_digits(self):
        from secure_rsma.harness.report import fmt

        assert fmt(0.123456789) == "0.123457"
        assert fmt(4.80138630e-06) == "4.80139e-06"
        assert fmt(-0.0) == "0"
        assert fmt(12) == "12"

    def test_golden_file(self, tmp_path):
        out = tmp_path / "tiny.csv"
        assert main(["run", "--config", str(DATA / "tiny.ini"), "--out", str(out), "--quiet"]) == 0
        assert out.read_bytes() == (DATA / "golden_tiny.csv").read_bytes()

    def test_unwritable_path(self):
        with pytest.raises(OSError):
            emit_csv(BerCurve(["legit"]), "/nonexistent-dir/x.csv")


class TestEngine:
    def test_same_seed_identical(self):
        cfg = load_config(DATA / "tiny.ini")
        assert format_csv(run_experiment(cfg)) == format_csv(run_experiment(cfg))

    def test_different_seed_differs(self):
        cfg = load_config(DATA / "tiny.ini")
        assert format_csv(run_experiment(cfg)) != format_csv(run_experiment(cfg.replace(seed=8)))

    def test_worker_count_independent(self):
        cfg = load_config(DATA / "tiny.ini")
        assert format_csv(run_experiment(cfg, workers=1)) == format_csv(run_experiment(cfg, workers=3))

    def test_stopping_rule(self):
        cfg = reference_config(2, start_db=-5, stop_db=20, step_db=25, min_bits=10_000, max_frames=400, batch_frames=10)
        curve = run_experiment(cfg)
        low, high = curve.points
        # low SNR: enough bits and errors after 50 frames; high SNR: runs to the cap
        assert low.frames == 50 and low.bits["legit"] >= 10_000
        assert all(low.errors[n] >= 100 for n in ("legit", "baseline"))
        assert high.frames == 400

    def test_counts_bounded(self):
        cfg = load_config(DATA / "tiny.ini")
        for p in run_experiment(cfg).points:
            for name in p.bits:
                assert 0 <= p.errors[name] <= p.bits[name]
            assert p.bits["legit_common"] + p.bits["legit_private"] == p.bits["legit"]

    def test_noiseless_point(self):
        cfg = reference_config(5, eve_profiles=reference_config(0).eve_profiles)
        names = terminal_names(cfg)
        errors = np.zeros(len(names), dtype=np.int64)
        bits = np.zeros(len(names), dtype=np.int64)
        for f in range(400):
            e, b = simulate_frame(cfg, 0, f, 0.0)
            errors += e
            bits += b
        ber = dict(zip(names, errors / bits))
        assert ber["legit"] == 0 and ber["baseline"] == 0
        assert ber["eve_internal_k0"] == pytest.approx(0.5 * (1 - 1 / 25), abs=0.02)
        assert ber["eve_external_k0"] == pytest.approx(0.5 * (1 - 1 / 25), abs=0.02)

    def test_theory_overlay(self):
        cfg = reference_config(1, start_db=10, stop_db=10, min_bits=10_000, max_frames=50)
        p = run_experiment(cfg).points[0]
        assert p.theory_eq7 == pytest.approx(4.801386300602083e-06, rel=1e-9)

    def test_non_finite_aborts(self, monkeypatch):
        from secure_rsma.harness import engine

        monkeypatch.setattr(engine.airlink, "complex_noise", lambda shape, v, rng: np.full(shape, np.nan + 0j))
        cfg = reference_config(1, start_db=0, stop_db=0, min_bits=10_000, max_frames=50)
        with pytest.raises(engine.SimulationError, match="non-finite"):
            run_experiment(cfg)


class TestCli:
    def test_validate_reference(self, capsys):
        assert main(["validate", "--config", str(ROOT / "configs" / "reference.ini")]) == 0
        assert capsys.readouterr().out.startswith("ok:")

    def test_pattern_identity(self, capsys):
        assert main(["pattern", "--bits", "000"]) == 0
        assert capsys.readouterr().out == "1 2 3 4\n"

    def test_pattern_inspect(self, capsys):
        assert main(["pattern", "--bits", "111", "--inspect"]) == 0
        assert capsys.readouterr().out.splitlines() == ["2 3 4 1", "inverse: 4 1 2 3", "swaps: 3"]

    def test_census(self, capsys):
        assert main(["census", "--B", "3"]) == 0
        assert capsys.readouterr().out.startswith("B=3: 4 distinct patterns")

    def test_theory(self, capsys, tmp_path):
        out = tmp_path / "th.csv"
        assert main(["theory", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "snr_db,theory_eq7,theory_eq14" and len(lines) == 32

    def test_run_stdout(self, capsys):
        assert main(["run", "--config", str(DATA / "tiny.ini"), "--quiet"]) == 0
        assert capsys.readouterr().out == (DATA / "golden_tiny.csv").read_text()

    def test_seed_override(self, capsys):
        assert main(["run", "--config", str(DATA / "tiny.ini"), "--seed", "8", "--quiet"]) == 0
        assert capsys.readouterr().out != (DATA / "golden_tiny.csv").read_text()

    def test_missing_config(self, capsys):
        assert main(["validate", "--config", "does-not-exist.ini"]) != 0
        assert "cannot read config" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["pattern", "--bits", "01", "--frobnicate"])
        assert exc.value.code != 0
        assert "usage" in capsys.readouterr().err

    def test_bad_bits(self, capsys):
        with pytest.raises(SystemExit):
            main(["pattern", "--bits", "012"])

    def test_census_out_of_range(self, capsys):
        assert main(["census", "--B", "13"]) == 1

    def test_module_entry_point(self):
        res = subprocess.run(
            [sys.executable, "-m", "secure_rsma", "pattern", "--bits", "10"],
            capture_output=True,
            text=True,
            check=True,
        )
        assert res.stdout == "2 1 3\n"
