"""Field files.

EFK1 layout: the 4-byte magic ``b"EFK1"``, little-endian int32 ``nx`` and
``ny``, then float64 samples row-major (x index outer, y index inner).  A
file may hold several components back to back (velocity files hold two);
the count follows from the file size.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .grid import Grid, ScalarField, VectorField

MAGIC = b"EFK1"
_HEADER = struct.Struct("<4sii")


def write_efk(path, components) -> Path:
    comps = [np.asarray(c, dtype="<f8") for c in components]
    nx, ny = comps[0].shape
    if any(c.shape != (nx, ny) for c in comps):
        raise ConfigurationError("all components must share one shape")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, nx, ny))
        for c in comps:
            fh.write(np.ascontiguousarray(c).tobytes())
    return path


def read_efk(path) -> np.ndarray:
    """Array of shape (n_components, nx, ny)."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ConfigurationError(f"{path}: truncated header")
    magic, nx, ny = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ConfigurationError(f"{path}: bad magic {magic!r}")
    body = len(raw) - _HEADER.size
    per = 8 * nx * ny
    if nx <= 0 or ny <= 0 or body % per or body == 0:
        raise ConfigurationError(f"{path}: payload of {body} bytes does not fit {nx}x{ny} fields")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    return data.reshape(body // per, nx, ny).astype(float)


def read_scalar(path) -> ScalarField:
    arr = read_efk(path)
    return ScalarField(Grid(arr.shape[1], arr.shape[2]), arr[0])


def read_vector(path) -> VectorField:
    arr = read_efk(path)
    if arr.shape[0] != 2:
        raise ConfigurationError(f"{path}: expected 2 components, found {arr.shape[0]}")
    return VectorField(Grid(arr.shape[1], arr.shape[2]), arr[0], arr[1])


def write_csv(path, grid: Grid, components: dict) -> Path:
    """One row per grid node: x, y and every named component."""
    path = Path(path)
    X, Y = grid.mesh
    names = list(components)
    cols = [X.ravel(), Y.ravel()] + [np.asarray(components[k]).ravel() for k in names]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y"] + names)
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
    return path


def write_table(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return path
