"""Text formats shared across pipeline stages.

* Dense matrix: header line "rows cols", then whitespace-separated decimals.
* Keyed matrix (word2vec text format): header "rows cols", then one line per
  row: key + decimals. Used for embeddings and class prototypes.
* Id list: one identifier per line (labels, seen/unseen/validation splits).
"""

from __future__ import annotations

import numpy as np

FLOAT_FMT = "%.6f"


class FormatError(Exception):
    """Malformed matrix/embedding file."""


def save_matrix(path, matrix: np.ndarray) -> None:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError("expected a 2-D array")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
        for row in matrix:
            fh.write(" ".join(FLOAT_FMT % v for v in row) + "\n")


def load_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        rows, cols = _parse_header(fh.readline(), path)
        out = np.empty((rows, cols), dtype=np.float64)
        n = 0
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if n >= rows:
                raise FormatError(f"{path}: more rows than the header declares")
            if len(parts) != cols:
                raise FormatError(f"{path}: row {n} has {len(parts)} values, expected {cols}")
            out[n] = [float(v) for v in parts]
            n += 1
    if n != rows:
        raise FormatError(f"{path}: header declares {rows} rows, found {n}")
    return out


def save_keyed_matrix(path, keys: list[str], matrix: np.ndarray) -> None:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != len(keys):
        raise ValueError("keys and matrix rows must align")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(keys)} {matrix.shape[1]}\n")
        for key, row in zip(keys, matrix):
            fh.write(key + " " + " ".join(FLOAT_FMT % v for v in row) + "\n")


def load_keyed_matrix(path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        rows, cols = _parse_header(fh.readline(), path)
        keys: list[str] = []
        out = np.empty((rows, cols), dtype=np.float64)
        for line in fh:
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if len(keys) >= rows:
                raise FormatError(f"{path}: more rows than the header declares")
            if len(parts) != cols + 1:
                raise FormatError(
                    f"{path}: row {len(keys)} has {len(parts) - 1} values, expected {cols}"
                )
            keys.append(parts[0])
            out[len(keys) - 1] = [float(v) for v in parts[1:]]
    if len(keys) != rows:
        raise FormatError(f"{path}: header declares {rows} rows, found {len(keys)}")
    return keys, out


def _parse_header(line: str, path) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise FormatError(f"{path}: bad header line {line!r}")
    try:
        rows, cols = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise FormatError(f"{path}: bad header line {line!r}") from exc
    if rows < 0 or cols < 1:
        raise FormatError(f"{path}: bad header dimensions {rows}x{cols}")
    return rows, cols


def save_id_list(path, ids) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in ids:
            fh.write(f"{item}\n")


def load_id_list(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]
