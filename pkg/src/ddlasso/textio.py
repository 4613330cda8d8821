"""Plain-text matrix and vector files.

One row per line, entries separated by commas and/or whitespace, ``#``
starts a comment line. Writers emit the shortest text that parses back to
the same float, so values round-trip exactly.
"""

import re

import numpy as np

from .errors import ParseError
from .matrix import as_matrix, as_vector

_SPLIT = re.compile(r"[,\s]+")


def fmt(x):
    """Shortest text that reads back as the same float; integral values drop the ``.0``."""
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def _rows(text, source):
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(tok) for tok in _SPLIT.split(line) if tok])
        except ValueError as exc:
            raise ParseError(f"{source}:{lineno}: {exc}") from None
    return rows


def parse_matrix(text, source="<string>"):
    rows = _rows(text, source)
    if not rows:
        raise ParseError(f"{source}: no matrix rows found")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ParseError(f"{source}: ragged rows with lengths {sorted(widths)}")
    return as_matrix(rows, source)


def parse_vector(text, source="<string>"):
    rows = _rows(text, source)
    values = [x for r in rows for x in r]
    if not values:
        raise ParseError(f"{source}: no values found")
    return as_vector(values, source)


def read_matrix(path):
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read(), str(path))


def read_vector(path):
    with open(path, encoding="utf-8") as fh:
        return parse_vector(fh.read(), str(path))


def format_matrix(a):
    a = np.atleast_2d(a)
    return "".join(" ".join(fmt(x) for x in row) + "\n" for row in a)


def write_matrix(path, a):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_matrix(a))


def write_vector(path, v):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(fmt(x) + "\n" for x in np.ravel(v)))
