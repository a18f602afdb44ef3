"""CSV output: '#' provenance header, comma separated, LF line endings."""

from __future__ import annotations

import csv
import io
import math
import os

from .. import __version__


def fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def provenance(config: dict, seed=None):
    lines = [f"longmem {__version__}"]
    lines.append("config: " + " ".join(f"{k}={fmt(v)}" for k, v in config.items()))
    if seed is not None:
        lines.append(f"seed: {seed}")
    return lines


def render(columns, rows, header=()):
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def write(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def read(path):
    """Return (comment lines, column names, rows as lists of strings)."""
    comments, data = [], []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
            else:
                data.append(line)
    rows = list(csv.reader(data))
    return comments, (rows[0] if rows else []), rows[1:]
