"""Delimited tables and key-value reports with provenance headers.

Every output file starts with '# key = value' provenance lines; numeric
values are printed with 17 significant digits so the tables round-trip
binary floating point exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

FLOAT_DIGITS = 17


def fmt(value) -> str:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{FLOAT_DIGITS}g}"
    if isinstance(value, (list, tuple)):
        return "(" + ", ".join(fmt(v) for v in value) + ")"
    return str(value)


def provenance_lines(meta: dict) -> list:
    return [f"# {key} = {fmt(value)}" for key, value in meta.items()]


def write_table(path: Path, columns, rows, meta: dict) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        for line in provenance_lines(meta):
            handle.write(line + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(cell) for cell in row])


def render_report(meta: dict, body: dict) -> str:
    lines = provenance_lines(meta)
    lines.append("")
    for key, value in body.items():
        lines.append(f"{key} = {fmt(value)}")
    return "\n".join(lines) + "\n"


def write_report(path: Path, meta: dict, body: dict) -> None:
    Path(path).write_text(render_report(meta, body), encoding="utf-8")
