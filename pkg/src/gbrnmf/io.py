"""CSV matrix files.

Plain numeric CSV, one matrix row per line, no header by default. Values
are written with 17 significant digits so a write/read round trip
reproduces every float64 exactly; any negative, non-finite or malformed
value on load is an error naming the file and row.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import MatrixLoadError

__all__ = ["load_labels", "load_matrix", "save_labels", "save_matrix"]


def save_matrix(path, arr: np.ndarray) -> None:
    arr = np.asarray(arr, dtype=float)
    if arr.ndim != 2:
        raise MatrixLoadError(f"{path}: only 2-D matrices are written, got {arr.ndim}-D")
    np.savetxt(path, arr, fmt="%.17g", delimiter=",")


def load_matrix(path, header: bool = False, name: str | None = None) -> np.ndarray:
    """Parse a CSV matrix; reject ragged rows and negative entries."""
    name = name or str(path)
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise MatrixLoadError(f"{name}: {exc}") from exc
    if header:
        lines = lines[1:]
    rows: list[np.ndarray] = []
    width: int | None = None
    for lineno, line in enumerate(lines, start=2 if header else 1):
        if not line.strip():
            continue
        try:
            values = np.array(line.split(","), dtype=float)
        except ValueError as exc:
            raise MatrixLoadError(f"{name}, row {lineno}: {exc}") from exc
        if width is None:
            width = values.size
        elif values.size != width:
            raise MatrixLoadError(
                f"{name}, row {lineno}: expected {width} values, found {values.size}"
            )
        if not np.isfinite(values).all():
            col = int(np.argwhere(~np.isfinite(values))[0][0])
            raise MatrixLoadError(
                f"{name}, row {lineno}: non-finite value in column {col + 1}"
            )
        if (values < 0.0).any():
            col = int(np.argwhere(values < 0.0)[0][0])
            raise MatrixLoadError(
                f"{name}, row {lineno}: negative value {values[col]!r} "
                f"in column {col + 1}"
            )
        rows.append(values)
    if not rows:
        raise MatrixLoadError(f"{name}: no data rows")
    return np.vstack(rows)


def save_labels(path, labels: np.ndarray) -> None:
    np.savetxt(path, np.asarray(labels, dtype=int)[:, None], fmt="%d")


def load_labels(path, name: str | None = None) -> np.ndarray:
    name = name or str(path)
    try:
        raw = Path(path).read_text().split()
    except OSError as exc:
        raise MatrixLoadError(f"{name}: {exc}") from exc
    try:
        return np.array(raw, dtype=int)
    except ValueError as exc:
        raise MatrixLoadError(f"{name}: {exc}") from exc
