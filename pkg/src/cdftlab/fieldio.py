"""CSV + JSON-sidecar serialization of grid fields.

Scalar fields are written as ``x,y,value`` rows, vector fields as
``x,y,vx,vy``, row-major in y then x (x varies fastest). Values carry 17
significant digits, so float64 fields round-trip exactly. Each CSV gets a
JSON sidecar ``{"n": ..., "L": ..., "kind": "scalar" | "vector"}`` next to
it. Writes are atomic (temp file + rename), so error paths never leave
partial outputs behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .exceptions import FieldFormatError
from .grid import Grid2D, ScalarField, VectorField, grids_match, make_grid

__all__ = [
    "write_scalar_field",
    "write_vector_field",
    "read_field",
    "sidecar_path",
    "write_text_atomic",
]

HEADER_SCALAR = "x,y,value"
HEADER_VECTOR = "x,y,vx,vy"


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_text_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write(path, header: str, columns: list[np.ndarray], grid: Grid2D,
           kind: str) -> None:
    # y outer, x inner: transpose the (i=x, j=y) layout before raveling
    cols = [grid.X.T.ravel(), grid.Y.T.ravel()] + [c.T.ravel() for c in columns]
    lines = [header]
    for row in zip(*cols):
        lines.append(",".join(f"{v:.17g}" for v in row))
    write_text_atomic(path, "\n".join(lines) + "\n")
    sidecar = {"n": grid.n, "L": grid.L, "kind": kind}
    write_text_atomic(sidecar_path(path), json.dumps(sidecar, sort_keys=True) + "\n")


def write_scalar_field(path, f: ScalarField) -> None:
    _write(path, HEADER_SCALAR, [f.values], f.grid, "scalar")


def write_vector_field(path, v: VectorField) -> None:
    _write(path, HEADER_VECTOR, [v.x, v.y], v.grid, "vector")


def _load_sidecar(path) -> dict:
    sp = sidecar_path(path)
    if not sp.exists():
        raise FieldFormatError(f"missing sidecar {sp}")
    try:
        meta = json.loads(sp.read_text())
    except json.JSONDecodeError as err:
        raise FieldFormatError(f"sidecar {sp} is not valid JSON: {err}") from err
    for key in ("n", "L", "kind"):
        if key not in meta:
            raise FieldFormatError(f"sidecar {sp} lacks required key '{key}'")
    if meta["kind"] not in ("scalar", "vector"):
        raise FieldFormatError(f"sidecar {sp} has unknown kind {meta['kind']!r}")
    return meta


def read_field(path, grid: Grid2D | None = None):
    """Read a field written by this module; returns Scalar- or VectorField.

    If ``grid`` is given, the file must live on a matching grid.
    """
    path = Path(path)
    if not path.exists():
        raise FieldFormatError(f"no such field file: {path}")
    meta = _load_sidecar(path)
    n, L, kind = int(meta["n"]), float(meta["L"]), meta["kind"]
    try:
        file_grid = make_grid(L, n)
    except ValueError as err:
        raise FieldFormatError(f"sidecar of {path} describes a bad grid: {err}") from err
    if grid is not None and not grids_match(grid, file_grid):
        raise FieldFormatError(
            f"{path} is on grid (n={n}, L={L}), expected "
            f"(n={grid.n}, L={grid.L})"
        )
    expected_header = HEADER_SCALAR if kind == "scalar" else HEADER_VECTOR
    with open(path) as fh:
        header = fh.readline().strip()
    if header != expected_header:
        raise FieldFormatError(
            f"{path}: expected header '{expected_header}', found '{header}'"
        )
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as err:
        raise FieldFormatError(f"{path}: unparsable rows: {err}") from err
    ncols = 3 if kind == "scalar" else 4
    if data.shape != (n * n, ncols):
        raise FieldFormatError(
            f"{path}: expected {n * n} rows x {ncols} cols, got {data.shape}"
        )
    if not np.all(np.isfinite(data)):
        raise FieldFormatError(f"{path}: contains non-finite values")
    # spot-check the coordinate layout (y outer, x inner)
    if not (np.allclose(data[: n, 0], file_grid.xs, atol=1e-12)
            and np.allclose(data[: n, 1], file_grid.xs[0], atol=1e-12)):
        raise FieldFormatError(f"{path}: coordinate columns not in y-then-x order")
    if kind == "scalar":
        vals = data[:, 2].reshape(n, n).T       # rows are (j, i); store (i, j)
        try:
            return ScalarField(file_grid, vals)
        except ValueError as err:
            raise FieldFormatError(f"{path}: {err}") from err
    vx = data[:, 2].reshape(n, n).T
    vy = data[:, 3].reshape(n, n).T
    try:
        return VectorField(file_grid, np.stack([vx, vy]))
    except ValueError as err:
        raise FieldFormatError(f"{path}: {err}") from err
