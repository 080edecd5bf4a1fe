"""CSV output: header comment, header row, 6-digit floats, ``\\n`` endings."""

from __future__ import annotations

import csv
import io
from fractions import Fraction
from typing import Iterable, Optional, Sequence


def fmt(x, ndigits: int = 6) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (Fraction, float)):
        return f"{float(x):.{ndigits}f}"
    return str(x)


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], comment: Optional[str] = None) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(render_csv(columns, rows, comment))


def render_csv(columns: Sequence[str], rows: Iterable[Sequence], comment: Optional[str] = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(comment.rstrip("\n") + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Header and rows, skipping ``#`` comment lines."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [r for r in reader if r]
