"""Delimited output of BER curves."""

from __future__ import annotations

import math
from pathlib import Path

from secure_rsma.harness.engine import BerCurve

__all__ = ["csv_header", "format_csv", "emit_csv", "fmt"]


def fmt(x: float) -> str:
    """Six significant digits; integers stay integral."""
    if isinstance(x, int):
        return str(x)
    if math.isnan(x):
        return "nan"
    out = f"{x:.6g}"
    return "0" if out == "-0" else out


def csv_header(curve: BerCurve) -> list[str]:
    cols = ["snr_db", "bits"]
    for name in curve.terminals:
        cols += [f"{name}_ber", f"{name}_ci"]
    return cols + ["theory_eq7", "theory_eq14"]


def format_csv(curve: BerCurve) -> str:
    lines = [",".join(csv_header(curve))]
    for p in curve.points:
        row = [fmt(p.snr_db), str(p.bits["legit"])]
        for name in curve.terminals:
            row += [fmt(p.ber(name)), fmt(p.ci(name))]
        row += [fmt(p.theory_eq7), fmt(p.theory_eq14)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def emit_csv(curve: BerCurve, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csv(curve))
    return path
