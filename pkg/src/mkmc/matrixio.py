"""Matrix, mask, and config file formats used by the CLI.

Matrices travel either as headerless CSV (17 significant digits, so float64
round-trips exactly) or as a small binary format: magic ``MKMC``, a version
byte, row and column counts as little-endian uint32, then row-major
little-endian float64 payload.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
from jsonschema import ValidationError, validate

from .errors import FormatError
from .views import VisibilityPattern

MAGIC = b"MKMC"
VERSION = 1
_HEADER = struct.Struct("<4sBII")

RUN_CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "method": {"enum": ["fc", "pca", "fa"]},
        "rank": {
            "oneOf": [
                {"type": "integer", "minimum": 1},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"criterion": {"enum": ["gk", "kaiser"]}},
                    "required": ["criterion"],
                },
            ]
        },
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "max_iters": {"type": "integer", "minimum": 1},
        "reg_epsilon": {"type": "number", "minimum": 0},
        "seed": {"type": "integer"},
        "inputs": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "mask": {"type": "string"},
        "output_dir": {"type": "string"},
    },
}


def write_csv_matrix(path, a: np.ndarray) -> None:
    np.savetxt(path, np.atleast_2d(a), fmt="%.17g", delimiter=",")


def read_csv_matrix(path) -> np.ndarray:
    try:
        a = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise FormatError(f"{path}: cannot parse as CSV matrix: {exc}") from exc
    return a


def write_binary_matrix(path, a: np.ndarray) -> None:
    a = np.atleast_2d(np.asarray(a, dtype="<f8"))
    header = _HEADER.pack(MAGIC, VERSION, a.shape[0], a.shape[1])
    Path(path).write_bytes(header + a.tobytes(order="C"))


def read_binary_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated binary matrix header")
    magic, version, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic bytes {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 8 * rows * cols
    if len(raw) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    return np.frombuffer(raw[_HEADER.size :], dtype="<f8").reshape(rows, cols).copy()


def read_matrix(path) -> np.ndarray:
    """Sniff the format by magic bytes, falling back to CSV."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return read_binary_matrix(path)
    return read_csv_matrix(path)


def write_matrix(path, a: np.ndarray) -> None:
    """Write CSV for a .csv suffix, binary otherwise."""
    if Path(path).suffix.lower() == ".csv":
        write_csv_matrix(path, a)
    else:
        write_binary_matrix(path, a)


def write_mask(path, pattern: VisibilityPattern) -> None:
    Path(path).write_text(json.dumps(pattern.to_json_dict(), indent=2) + "\n")


def read_mask(path) -> VisibilityPattern:
    try:
        obj = json.loads(Path(path).read_text())
        return VisibilityPattern.from_json_dict(obj)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FormatError(f"{path}: invalid mask file: {exc}") from exc


def load_run_config(path) -> dict:
    """Parse and schema-validate a run-config JSON file; unknown keys rejected."""
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    try:
        validate(obj, RUN_CONFIG_SCHEMA)
    except ValidationError as exc:
        raise FormatError(f"{path}: invalid run config: {exc.message}") from exc
    return obj
