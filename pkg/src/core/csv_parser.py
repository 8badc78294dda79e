#!/usr/bin/env python3
"""
CSV reader and writer for nodal fields

Field files list one grid node per row in row-major order (x1 fastest):

    x1,x2,<name>,<name>,...

Values are written with 17 significant digits, so a write followed by a read
reproduces every float exactly.
"""

import csv
import io
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Union

import numpy as np

from ..utils.logger import logger
from .errors import ExportError, FieldError
from .field_grid import Grid2D
from .models import Displacement


DISPLACEMENT_COLUMNS = ['w1', 'w2', 'v']
PathLike = Union[str, Path]


def format_float(value: float) -> str:
    return '%.17g' % value


def format_field_csv(grid: Grid2D, columns: Mapping[str, np.ndarray]) -> str:
    """Render nodal arrays of shape (ny, nx) as CSV text"""
    names = list(columns)
    flat = []
    for name in names:
        values = np.asarray(columns[name], dtype=float)
        if values.shape != grid.shape:
            raise FieldError(f"column '{name}' has shape {values.shape}, grid is {grid.shape}")
        flat.append(values.ravel())

    X, Y = grid.mesh
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(['x1', 'x2'] + names)
    for k, (x1, x2) in enumerate(zip(X.ravel(), Y.ravel())):
        writer.writerow([format_float(x1), format_float(x2)] + [format_float(col[k]) for col in flat])
    return buffer.getvalue()


def parse_field_csv(csv_content: str, grid: Grid2D, names: Sequence[str]) -> Dict[str, np.ndarray]:
    """
    Parse field CSV text written for the given grid

    Args:
        csv_content: CSV string content with an x1,x2,<names> header
        grid: Grid the rows must match node by node
        names: Columns to return

    Returns:
        Column name -> array of shape (ny, nx)

    Raises:
        FieldError: On missing columns, wrong row count, mismatched
            coordinates or non-finite values
    """
    reader = csv.DictReader(io.StringIO(csv_content.strip()))
    header = reader.fieldnames or []
    missing = [c for c in ['x1', 'x2', *names] if c not in header]
    if missing:
        raise FieldError(f"field CSV lacks column(s) {', '.join(missing)}")

    rows = list(reader)
    if len(rows) != grid.size:
        raise FieldError(f"field CSV has {len(rows)} rows, grid {grid.nx}x{grid.ny} needs {grid.size}")

    try:
        data = {c: np.array([float(row[c]) for row in rows]) for c in ['x1', 'x2', *names]}
    except (TypeError, ValueError) as e:
        raise FieldError(f"field CSV contains a non-numeric entry: {e}") from e

    X, Y = grid.mesh
    scale = max(abs(grid.x_min), abs(grid.x_max), abs(grid.y_min), abs(grid.y_max), 1.0)
    tol = 1e-12 * scale
    for coord, expected in (('x1', X.ravel()), ('x2', Y.ravel())):
        bad = np.flatnonzero(np.abs(data[coord] - expected) > tol)
        if bad.size:
            k = int(bad[0])
            raise FieldError(f"field CSV row {k + 2}: {coord} = {data[coord][k]!r} "
                             f"does not match grid node {expected[k]!r}")

    fields = {}
    for name in names:
        values = data[name]
        if not np.isfinite(values).all():
            k = int(np.flatnonzero(~np.isfinite(values))[0])
            raise FieldError(f"field CSV row {k + 2}: non-finite {name}")
        fields[name] = values.reshape(grid.shape)
    return fields


def write_field_csv(path: PathLike, grid: Grid2D, columns: Mapping[str, np.ndarray]) -> Path:
    """Write nodal arrays to a field CSV

    Raises:
        ExportError: If the file cannot be written
    """
    path = Path(path)
    text = format_field_csv(grid, columns)
    try:
        path.write_text(text, encoding='utf-8')
    except OSError as e:
        raise ExportError(f"cannot write {path}: {e}") from e
    logger.debug(f"Wrote {len(columns)} field column(s) to {path}")
    return path


def read_field_csv(path: PathLike, grid: Grid2D, names: Sequence[str]) -> Dict[str, np.ndarray]:
    """Read named columns of a field CSV

    Raises:
        ExportError: If the file cannot be read
        FieldError: If the content does not match the grid
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ExportError(f"cannot read {path}: {e}") from e
    return parse_field_csv(text, grid, names)


def write_displacement_csv(path: PathLike, grid: Grid2D, d: Displacement) -> Path:
    return write_field_csv(path, grid, {'w1': d.w[..., 0], 'w2': d.w[..., 1], 'v': d.v})


def read_displacement_csv(path: PathLike, grid: Grid2D) -> Displacement:
    """Displacement from an x1,x2,w1,w2,v file written on the same grid"""
    cols = read_field_csv(path, grid, DISPLACEMENT_COLUMNS)
    logger.info(f"Loaded displacement from {path}")
    return Displacement(np.stack([cols['w1'], cols['w2']], axis=-1), cols['v'])


def table_columns(rows: List[Dict[str, object]]) -> List[str]:
    """Column order of a list of row dicts (first-seen order)"""
    columns: List[str] = []
    for row in rows:
        columns.extend(k for k in row if k not in columns)
    return columns
