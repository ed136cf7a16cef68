"""Command line entry point.

Subcommands::

    run       simulate a config and write the BER CSV
    theory    closed-form curves only
    pattern   build/inspect an interleaving pattern from indexing bits
    census    count distinct patterns for small B
    validate  check a config file
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from secure_rsma.bitframe import BitFramePlan, PlanError
from secure_rsma.harness.config import ConfigError, load_config, reference_config
from secure_rsma.harness.engine import SimulationError, run_experiment, theory_curve
from secure_rsma.harness.report import emit_csv, fmt, format_csv
from secure_rsma.interleaver import (
    MAX_CENSUS_B,
    census_patterns,
    generate_pattern,
    invert,
    swap_count,
)

__all__ = ["main", "build_parser"]


def _bits(text: str) -> list[int]:
    cleaned = text.replace(",", "").replace(" ", "")
    if any(c not in "01" for c in cleaned):
        raise argparse.ArgumentTypeError(f"expected a 0/1 string, got {text!r}")
    return [int(c) for c in cleaned]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secure-rsma",
        description="Secure RSMA link-level simulator with data-dependent interleaving.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a config and write the BER CSV")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--seed", type=int, help="override [run] seed")
    run.add_argument("--out", type=Path, help="CSV path (default: stdout)")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--quiet", action="store_true", help="no per-point progress on stderr")

    th = sub.add_parser("theory", help="closed-form curves only")
    th.add_argument("--config", type=Path, help="config file (default: reference scenario)")
    th.add_argument("--seed", type=int, help="accepted for symmetry; theory is deterministic")
    th.add_argument("--out", type=Path)

    pat = sub.add_parser("pattern", help="build an interleaving pattern from indexing bits")
    pat.add_argument("--bits", required=True, type=_bits, help="B-1 indexing bits, e.g. 101")
    pat.add_argument("--mask", type=_bits, help="B-1 stage mask (default all ones)")
    pat.add_argument("--inspect", action="store_true", help="also print inverse and swap count")
    pat.add_argument("--out", type=Path)

    cen = sub.add_parser("census", help="count distinct patterns for small B")
    cen.add_argument("--B", dest="b", type=int, required=True)
    cen.add_argument("--to", dest="b_to", type=int, help="sweep B..TO")
    cen.add_argument("--out", type=Path)

    val = sub.add_parser("validate", help="check a config file")
    val.add_argument("--config", required=True, type=Path)
    val.add_argument("--seed", type=int)
    return parser


def _write(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _cmd_run(args) -> int:
    cfg = load_config(args.config, seed=args.seed)

    def progress(snr, point):
        if not args.quiet:
            print(f"{snr:g} dB: {point.frames} frames, legit BER {point.ber('legit'):.3g}", file=sys.stderr)

    curve = run_experiment(cfg, workers=args.workers, progress=progress)
    if args.out is None:
        sys.stdout.write(format_csv(curve))
    else:
        emit_csv(curve, args.out)
    return 0


def _cmd_theory(args) -> int:
    if args.config is not None:
        cfg = load_config(args.config, seed=args.seed if args.seed is not None else 0)
    else:
        cfg = reference_config(seed=args.seed or 0)
    lines = ["snr_db,theory_eq7,theory_eq14"]
    lines += [",".join(fmt(v) for v in row) for row in theory_curve(cfg)]
    _write("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_pattern(args) -> int:
    q = generate_pattern(args.bits, args.mask)
    lines = [str(q)]
    if args.inspect:
        lines.append(f"inverse: {invert(q)}")
        lines.append(f"swaps: {swap_count(args.bits, args.mask)}")
    _write("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_census(args) -> int:
    hi = args.b if args.b_to is None else args.b_to
    if args.b < 2 or hi < args.b or hi > MAX_CENSUS_B:
        raise ValueError(f"need 2 <= B <= TO <= {MAX_CENSUS_B}")
    lines = []
    for b in range(args.b, hi + 1):
        n = census_patterns(b)
        stated = 2 ** (b - 2)
        lines.append(
            f"B={b}: {n} distinct patterns; 2^(B-1)={2 ** (b - 1)} "
            f"({'equal' if n == 2 ** (b - 1) else 'differs'}); "
            f"2^(L_i-1) with L_i=B-1: {stated} ({'equal' if n == stated else 'differs'})"
        )
    _write("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(args.config, seed=args.seed)
    p = cfg.plan
    print(
        f"ok: B={p.common_len} L={p.private_len} L_i={p.indexing_len} D_u'={p.non_indexed_len}, "
        f"{len(cfg.snr_points)} SNR points, {cfg.users} user(s), seed {cfg.seed}"
    )
    return 0


COMMANDS = {
    "run": _cmd_run,
    "theory": _cmd_theory,
    "pattern": _cmd_pattern,
    "census": _cmd_census,
    "validate": _cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, PlanError, SimulationError, ValueError, OSError) as exc:
        print(f"secure-rsma {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
