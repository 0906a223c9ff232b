"""CSV, manifest and gnuplot-script emission."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

FLOAT_FORMAT = "{:.16e}"


def format_value(v) -> str:
    """17 significant digits in scientific notation; bools as 0/1."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(v)
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return FLOAT_FORMAT.format(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    n = len(header)
    for r in rows:
        if len(r) != n:
            raise ValueError(f"row has {len(r)} fields, header has {n}")
        lines.append(",".join(format_value(v) for v in r))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path):
    """(header, rows of floats) for files written by ``write_csv``."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    header = text[0].split(",")
    return header, [[float(x) for x in line.split(",")] for line in text[1:]]


def git_blob_hash(data: bytes) -> str:
    """SHA-1 of ``blob <len>\\0<data>``, the hash git assigns to file content."""
    h = hashlib.sha1()
    h.update(b"blob %d\0" % len(data))
    h.update(data)
    return h.hexdigest()


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if hasattr(obj, "item"):  # numpy scalar
        return _jsonify(obj.item())
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonify(obj), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def write_gnuplot(path, csv_name: str, xcol: int, ycols: Sequence[int],
                  xlabel: str, ylabel: str, logy: bool = False) -> Path:
    """Small gnuplot script plotting columns of a CSV written by this package."""
    lines = [
        "set datafile separator ','",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
        "set key autotitle columnhead",
    ]
    if logy:
        lines.append("set logscale y")
    plots = ", ".join(f"'{csv_name}' using {xcol}:{c} with lines" for c in ycols)
    lines.append(f"plot {plots}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
