"""File helpers for raw float arrays and JSON documents."""

import json
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from seqfold.utils.exceptions import DatasetError

FLOAT32_LE = np.dtype("<f4")


def write_f32(file_path: Path, array: np.ndarray) -> int:
    """Write an array as row-major little-endian float32.

    Args:
        file_path: Destination file
        array: Values to write

    Returns:
        int: Number of bytes written

    Raises:
        DatasetError: If the file cannot be written
    """
    data = np.ascontiguousarray(array, dtype=FLOAT32_LE).tobytes(order="C")
    try:
        file_path.write_bytes(data)
    except OSError as e:
        raise DatasetError(f"Failed to write {file_path}", detail=str(e))
    return len(data)


def check_file(file_path: Path, expected_bytes: int) -> None:
    """Check that a file exists with the declared byte length.

    Raises:
        DatasetError: If the file is missing or has another length
    """
    if not file_path.is_file():
        raise DatasetError(f"Missing dataset file: {file_path}")
    try:
        size = file_path.stat().st_size
    except OSError as e:
        raise DatasetError(f"Cannot access file: {file_path}", detail=str(e))
    if size != expected_bytes:
        raise DatasetError(
            f"Length mismatch for {file_path}",
            detail=f"expected {expected_bytes} bytes, found {size}",
        )


def read_f32(file_path: Path, shape: Sequence[int]) -> np.ndarray:
    """Read a little-endian float32 file into a float64 array of ``shape``.

    Raises:
        DatasetError: If the file is missing or holds the wrong count
    """
    count = int(np.prod(shape))
    check_file(file_path, count * FLOAT32_LE.itemsize)
    values = np.fromfile(file_path, dtype=FLOAT32_LE, count=count)
    return values.reshape(tuple(shape)).astype(np.float64)


def write_json(file_path: Path, payload: Any) -> int:
    """Write indented JSON and return its byte length."""
    data = json.dumps(payload, indent=2, sort_keys=True).encode("utf-8")
    try:
        file_path.write_bytes(data)
    except OSError as e:
        raise DatasetError(f"Failed to write {file_path}", detail=str(e))
    return len(data)


def read_json(file_path: Path) -> Any:
    """Load a JSON document.

    Raises:
        DatasetError: If the file is missing or not valid JSON
    """
    try:
        return json.loads(file_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DatasetError(f"Missing dataset file: {file_path}")
    except (OSError, ValueError) as e:
        raise DatasetError(f"Cannot parse {file_path}", detail=str(e))
