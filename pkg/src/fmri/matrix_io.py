"""Row-major float32 little-endian matrices with JSON sidecars"""

import json
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from ..utils.error_handler import DecodeError, ValidationError
from ..utils.validators import validate_keys, validate_positive_int

DTYPE_TAG = "f32le"
SIDECAR_FIELDS = ('n', 'd', 'dtype', 'file', 'label', 'row_ids')


def write_matrix(matrix: np.ndarray, directory: Path, stem: str) -> dict:
    """Write ``matrix`` to ``<directory>/<stem>.f32`` and return its descriptor"""
    matrix = np.asarray(matrix)
    if matrix.ndim == 1:
        matrix = matrix[np.newaxis, :]
    if matrix.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got shape {matrix.shape}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    file_name = f"{stem}.f32"
    (directory / file_name).write_bytes(
        np.ascontiguousarray(matrix, dtype='<f4').tobytes(order='C'))
    return {'n': int(matrix.shape[0]), 'd': int(matrix.shape[1]),
            'dtype': DTYPE_TAG, 'file': file_name}


def read_matrix(descriptor: dict, directory: Path, what: str = "matrix") -> np.ndarray:
    """Read a matrix described by ``{n, d, dtype, file}``; rejects non-finite rows"""
    n = validate_positive_int(descriptor.get('n'), f"{what}.n")
    d = validate_positive_int(descriptor.get('d'), f"{what}.d")
    if descriptor.get('dtype') != DTYPE_TAG:
        raise ValidationError(f"{what}: unsupported dtype {descriptor.get('dtype')!r}")
    path = Path(directory) / descriptor['file']
    data = path.read_bytes()
    expected = n * d * 4
    if len(data) != expected:
        raise DecodeError(f"{what}: expected {expected} payload bytes, found {len(data)}",
                          min(len(data), expected), str(path))
    matrix = np.frombuffer(data, dtype='<f4').reshape(n, d).astype(np.float64)
    bad_rows = np.flatnonzero(~np.isfinite(matrix).all(axis=1))
    if bad_rows.size:
        row = int(bad_rows[0])
        col = int(np.flatnonzero(~np.isfinite(matrix[row]))[0])
        raise DecodeError(f"{what}: non-finite value in row {row}", 4 * (row * d + col), str(path))
    return matrix


def save_matrix_file(matrix: np.ndarray, sidecar_path: Path, label: Optional[str] = None,
                     row_ids: Optional[list] = None) -> Path:
    """Write a sidecar JSON plus payload next to it"""
    sidecar_path = Path(sidecar_path)
    descriptor = write_matrix(matrix, sidecar_path.parent, sidecar_path.stem)
    if label is not None:
        descriptor['label'] = label
    if row_ids is not None:
        if len(row_ids) != descriptor['n']:
            raise ValidationError("row_ids length does not match the matrix rows")
        descriptor['row_ids'] = list(row_ids)
    sidecar_path.write_text(json.dumps(descriptor, indent=2))
    return sidecar_path


def load_matrix_file(sidecar_path: Path) -> Tuple[np.ndarray, dict]:
    sidecar_path = Path(sidecar_path)
    try:
        descriptor = json.loads(sidecar_path.read_text())
    except json.JSONDecodeError as e:
        raise DecodeError(f"malformed sidecar ({e.msg})", e.pos, str(sidecar_path)) from e
    validate_keys(descriptor, SIDECAR_FIELDS, f"sidecar {sidecar_path.name}",
                  required=('n', 'd', 'dtype', 'file'))
    matrix = read_matrix(descriptor, sidecar_path.parent, sidecar_path.name)
    return matrix, descriptor
