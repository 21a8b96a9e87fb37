"""Plain-text formats for complex matrices and vectors.

A complex cell is written ``re,im``; cells on a row are separated by ``;``.
A complex vector has one cell per line and a real vector one number per line.
Lines starting with ``#`` are comments and blank lines are skipped.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = [
    "FormatError",
    "read_complex_matrix",
    "write_complex_matrix",
    "read_complex_vector",
    "write_complex_vector",
    "read_real_vector",
    "write_real_vector",
]


class FormatError(ValueError):
    """Malformed input file; carries the offending 1-based line number."""

    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def _data_lines(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if text and not text.startswith("#"):
                yield lineno, text


def _cell(path, lineno, text) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise FormatError(path, lineno, f"expected 're,im', got {text!r}")
    try:
        re, im = float(parts[0]), float(parts[1])
    except ValueError:
        raise FormatError(path, lineno, f"non-numeric cell {text!r}") from None
    if not (np.isfinite(re) and np.isfinite(im)):
        raise FormatError(path, lineno, f"non-finite cell {text!r}")
    return complex(re, im)


def _fmt(v: complex) -> str:
    return f"{float(v.real)!r},{float(v.imag)!r}"


def _header(comments) -> str:
    return "".join(f"# {c}\n" for c in comments)


def read_complex_matrix(path) -> np.ndarray:
    rows = []
    width = None
    for lineno, text in _data_lines(path):
        row = [_cell(path, lineno, c.strip()) for c in text.split(";")]
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise FormatError(path, lineno, f"row has {len(row)} cells, expected {width}")
        rows.append(row)
    if not rows:
        raise FormatError(path, 0, "no data rows")
    return np.array(rows, dtype=complex)


def write_complex_matrix(path, M, comments=()) -> Path:
    M = np.asarray(M, dtype=complex)
    body = "\n".join(";".join(_fmt(v) for v in row) for row in M)
    path = Path(path)
    path.write_text(_header(comments) + body + "\n")
    return path


def read_complex_vector(path) -> np.ndarray:
    vals = [_cell(path, lineno, text) for lineno, text in _data_lines(path)]
    if not vals:
        raise FormatError(path, 0, "no data rows")
    return np.array(vals, dtype=complex)


def write_complex_vector(path, v, comments=()) -> Path:
    path = Path(path)
    path.write_text(_header(comments) + "".join(_fmt(c) + "\n" for c in np.asarray(v, dtype=complex)))
    return path


def read_real_vector(path) -> np.ndarray:
    vals = []
    for lineno, text in _data_lines(path):
        try:
            vals.append(float(text))
        except ValueError:
            raise FormatError(path, lineno, f"non-numeric value {text!r}") from None
    return np.array(vals)


def write_real_vector(path, v, comments=()) -> Path:
    path = Path(path)
    path.write_text(_header(comments) + "".join(f"{float(c)!r}\n" for c in np.asarray(v, dtype=float)))
    return path
