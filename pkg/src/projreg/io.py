"""Plain-text file formats.

A dense map is stored as CSV whose first line is ``rows,cols`` followed by one
line per row. Floats are written with :func:`repr`, the shortest string that
round-trips. Metadata files hold one ``key=value`` pair per line.
"""

from pathlib import Path

import numpy as np

from ._validation import check_finite
from .exceptions import ValidationError


def write_dense_map(path, A):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    check_finite(A, str(path))
    lines = [f"{A.shape[0]},{A.shape[1]}"]
    if A.shape[1]:
        lines.extend(",".join(repr(float(x)) for x in row) for row in A)
    Path(path).write_text("\n".join(lines) + "\n")


def read_dense_map(path):
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValidationError(f"{path}: empty file")
    try:
        rows, cols = (int(t) for t in lines[0].split(","))
        body = [line for line in lines[1:] if line.strip()]
        if cols == 0:
            return np.zeros((rows, 0))
        A = np.array([[float(t) for t in line.split(",")] for line in body])
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed dense map ({exc})") from None
    if A.shape != (rows, cols):
        raise ValidationError(
            f"{path}: header says {rows}x{cols}, body is {A.shape[0]}x"
            f"{A.shape[1] if A.ndim == 2 else 0}"
        )
    return check_finite(A, str(path))


def read_vector(path):
    A = read_dense_map(path)
    if A.shape[1] != 1 and A.shape[0] != 1:
        raise ValidationError(f"{path}: expected a single column, got {A.shape}")
    return A.ravel()


def format_value(value):
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return "none"
    return str(value)


def write_meta(path, items):
    text = "".join(f"{k}={format_value(v)}\n" for k, v in items.items())
    Path(path).write_text(text)


def read_meta(path):
    meta = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValidationError(f"{path}: malformed line {line!r}")
        meta[key.strip()] = value.strip()
    return meta
