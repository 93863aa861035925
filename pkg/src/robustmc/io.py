"""Plain-text fixture formats.

* matrix file: first line ``m n``, then ``m`` lines of ``n`` values
* mask file: one ``i j`` pair per line (0-based)
* coefficient file: one ``i j value`` triple per line
* index file: one column index per line
* config file: flat ``key=value`` lines, ``#`` comments

Floats are written with ``repr`` so they round-trip exactly.  Every
writer goes through a temporary file and an atomic rename, so a failed
run never leaves a truncated output behind.
"""

from __future__ import annotations

import csv
import io as _io
import os
import tempfile
from pathlib import Path

import numpy as np

from .basis import ObservedCoefficients
from .matcore import InputError


def atomic_write(path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _fmt(x: float) -> str:
    return repr(float(x))


def format_matrix(A) -> str:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise InputError("matrix must be 2-D")
    lines = [f"{A.shape[0]} {A.shape[1]}"]
    lines += [" ".join(_fmt(v) for v in row) for row in A]
    return "\n".join(lines) + "\n"


def write_matrix(path, A) -> None:
    atomic_write(path, format_matrix(A))


def read_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise InputError(f"{path}: first line must be 'm n'")
        m, n = int(header[0]), int(header[1])
        rows = [line.split() for line in fh if line.strip()]
    if len(rows) != m or any(len(r) != n for r in rows):
        raise InputError(f"{path}: expected {m} rows of {n} values")
    A = np.array(rows, dtype=float).reshape(m, n)
    if not np.all(np.isfinite(A)):
        raise InputError(f"{path}: non-finite entries")
    return A


def write_mask(path, mask) -> None:
    ii, jj = np.nonzero(np.asarray(mask, dtype=bool))
    atomic_write(path, "".join(f"{i} {j}\n" for i, j in zip(ii, jj)))


def read_mask(path, shape) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            i, j = (int(t) for t in line.split())
            if not (0 <= i < shape[0] and 0 <= j < shape[1]):
                raise InputError(f"{path}:{lineno}: index ({i}, {j}) out of range")
            mask[i, j] = True
    return mask


def write_observed(path, obs: ObservedCoefficients) -> None:
    atomic_write(path, "".join(f"{i} {j} {_fmt(v)}\n" for i, j, v in obs.triples()))


def read_observed(path, shape) -> ObservedCoefficients:
    triples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise InputError(f"{path}:{lineno}: expected 'i j value'")
            triples.append((int(parts[0]), int(parts[1]), float(parts[2])))
    return ObservedCoefficients.from_triples(triples, shape)


def write_indices(path, indices) -> None:
    atomic_write(path, "".join(f"{int(i)}\n" for i in indices))


def read_indices(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return np.array([int(line) for line in fh if line.strip()], dtype=int)


def format_csv(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_csv(path, header, rows) -> None:
    atomic_write(path, format_csv(header, rows))


def read_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def format_pgm(grid, maxval: int = 255) -> str:
    """ASCII (P2) greyscale image; ``grid`` values already scaled to 0..maxval."""
    grid = np.asarray(grid, dtype=int)
    h, w = grid.shape
    lines = ["P2", f"{w} {h}", str(maxval)]
    lines += [" ".join(str(int(v)) for v in row) for row in grid]
    return "\n".join(lines) + "\n"


def write_pgm(path, grid, maxval: int = 255) -> None:
    atomic_write(path, format_pgm(grid, maxval))


def read_pgm(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        tokens = [t for line in fh if not line.startswith("#") for t in line.split()]
    if tokens[0] != "P2":
        raise InputError(f"{path}: not an ASCII PGM")
    w, h = int(tokens[1]), int(tokens[2])
    return np.array(tokens[4:4 + w * h], dtype=int).reshape(h, w)


def read_config(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def write_config(path, values: dict) -> None:
    atomic_write(path, "".join(f"{k}={v}\n" for k, v in values.items()))
