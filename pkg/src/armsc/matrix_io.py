"""Plain-text readers and writers for data matrices and label vectors.

Matrices follow the columns-as-samples convention: a CSV file with ``m``
lines of ``n`` comma-separated values is an ``m x n`` matrix holding ``n``
samples. MatrixMarket files use the dense ``array real general`` flavour
with a column-major body.
"""
from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "MatrixFormatError",
    "load_matrix",
    "save_matrix",
    "load_labels",
    "save_labels",
    "reindex_labels",
]

MM_HEADER = "%%MatrixMarket matrix array real general"
_FORMATS = {"csv": "csv", "mm": "mm", "matrix-market-array": "mm", "mtx": "mm"}


class MatrixFormatError(ValueError):
    """Raised when a matrix or label file cannot be parsed.

    ``lineno`` is 1-based, or None when the problem is not tied to a line.
    """

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where = f"{path}"
            if lineno is not None:
                where += f":{lineno}"
            where += ": "
        super().__init__(where + message)


def _resolve_format(path, fmt):
    if fmt is None:
        ext = os.path.splitext(str(path))[1].lower()
        return "mm" if ext in (".mtx", ".mm") else "csv"
    try:
        return _FORMATS[fmt.lower()]
    except KeyError:
        raise ValueError(f"unknown matrix format {fmt!r}") from None


def _parse_float(token, path, lineno):
    try:
        value = float(token)
    except ValueError:
        raise MatrixFormatError(f"cannot parse {token.strip()!r} as a number",
                                path, lineno) from None
    if not math.isfinite(value):
        raise MatrixFormatError(f"non-finite entry {token.strip()!r}", path, lineno)
    return value


def _load_csv(path):
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            values = [_parse_float(tok, path, lineno) for tok in line.split(",")]
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise MatrixFormatError(
                    f"ragged row: expected {width} values, found {len(values)}",
                    path, lineno)
            rows.append(values)
    if not rows:
        raise MatrixFormatError("empty matrix file", path)
    return np.array(rows, dtype=np.float64)


def _load_mm(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    if not lines:
        raise MatrixFormatError("empty matrix file", path)
    header = lines[0].split()
    if (len(header) < 5 or header[0].lower() != "%%matrixmarket"
            or [h.lower() for h in header[1:5]] != ["matrix", "array", "real", "general"]):
        raise MatrixFormatError(f"unsupported header, expected '{MM_HEADER}'", path, 1)

    shape = None
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        if shape is None:
            parts = stripped.split()
            if len(parts) != 2:
                raise MatrixFormatError("expected 'rows cols' size line", path, lineno)
            try:
                shape = (int(parts[0]), int(parts[1]))
            except ValueError:
                raise MatrixFormatError("non-integer size line", path, lineno) from None
            if shape[0] < 1 or shape[1] < 1:
                raise MatrixFormatError("matrix dimensions must be positive", path, lineno)
            continue
        for tok in stripped.split():
            values.append(_parse_float(tok, path, lineno))
    if shape is None:
        raise MatrixFormatError("missing size line", path)
    m, n = shape
    if len(values) != m * n:
        raise MatrixFormatError(f"expected {m * n} entries, found {len(values)}", path)
    return np.array(values, dtype=np.float64).reshape((m, n), order="F")


def load_matrix(path, fmt=None):
    """Read a dense real matrix.

    Parameters
    ----------
    path : path-like
    fmt : {"csv", "matrix-market-array", "mm"}, optional
        Guessed from the extension when omitted (``.mtx``/``.mm`` means
        MatrixMarket, anything else CSV).

    Returns
    -------
    ndarray of shape (m, n), float64
    """
    kind = _resolve_format(path, fmt)
    if kind == "csv":
        return _load_csv(path)
    return _load_mm(path)


def save_matrix(M, path, fmt=None):
    """Write ``M`` with 17 significant digits so a reload is exact to round-off."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if M.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    kind = _resolve_format(path, fmt)
    with open(path, "w", encoding="utf-8") as fh:
        if kind == "csv":
            for row in M:
                fh.write(",".join(f"{v:.17g}" for v in row))
                fh.write("\n")
        else:
            fh.write(MM_HEADER + "\n")
            fh.write(f"{M.shape[0]} {M.shape[1]}\n")
            for v in M.ravel(order="F"):
                fh.write(f"{v:.17g}\n")


def reindex_labels(labels):
    """Map arbitrary integer ids onto ``0..k-1`` in order of first appearance."""
    labels = np.asarray(labels)
    mapping = {}
    out = np.empty(labels.shape[0], dtype=np.int64)
    for i, lab in enumerate(labels.tolist()):
        out[i] = mapping.setdefault(lab, len(mapping))
    return out


def load_labels(path):
    """Read one base-10 integer per line; ids are re-indexed to ``0..k-1``."""
    raw = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tok = line.strip()
            if not tok:
                continue
            try:
                raw.append(int(tok, 10))
            except ValueError:
                raise MatrixFormatError(f"cannot parse {tok!r} as an integer label",
                                        path, lineno) from None
    if not raw:
        raise MatrixFormatError("empty label file", path)
    return reindex_labels(raw)


def save_labels(labels, path):
    with open(path, "w", encoding="utf-8") as fh:
        for lab in np.asarray(labels, dtype=np.int64):
            fh.write(f"{int(lab)}\n")
