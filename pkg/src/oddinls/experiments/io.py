"""On-disk formats: observables CSV, JSON reports and binary checkpoints.

Checkpoint layout (all little-endian)::

    b"INLS" | u32 version | u32 metadata length | metadata JSON (utf-8)
            | (N-1) x (f64 re, f64 im)

The metadata holds ``{"grid": {"L", "N"}, "t", "params"}``.
"""
from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from ..domain import Grid, PhysParams, State
from ..observables import CSV_FIELDS, ObservableSample

MAGIC = b"INLS"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sII")


class CheckpointError(ValueError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


class CheckpointConsistencyError(CheckpointError):
    pass


def save_checkpoint(state: State, path, params: Optional[PhysParams] = None) -> Path:
    path = Path(path)
    meta = {"grid": state.grid.to_dict(), "t": state.t}
    if params is not None:
        meta["params"] = params.to_dict()
    blob = json.dumps(meta, sort_keys=True).encode()
    payload = np.ascontiguousarray(state.values, dtype="<c16").tobytes()
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, len(blob)))
        fh.write(blob)
        fh.write(payload)
    tmp.replace(path)
    return path


def read_checkpoint(path) -> tuple[State, dict]:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise CheckpointTruncatedError(f"{path}: file shorter than the header")
    magic, version, meta_len = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointVersionError(f"{path}: bad magic {magic!r}, not an INLS checkpoint")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    start = _HEADER.size
    if len(raw) < start + meta_len:
        raise CheckpointTruncatedError(f"{path}: metadata truncated")
    try:
        meta = json.loads(raw[start:start + meta_len].decode())
        grid = Grid(meta["grid"]["L"], meta["grid"]["N"])
        t = float(meta["t"])
    except (ValueError, KeyError, TypeError) as exc:
        raise CheckpointConsistencyError(f"{path}: invalid metadata ({exc})") from exc
    body = raw[start + meta_len:]
    expected = 16 * grid.size
    if len(body) < expected:
        raise CheckpointTruncatedError(f"{path}: {len(body)} data bytes, expected {expected}")
    if len(body) > expected:
        raise CheckpointConsistencyError(f"{path}: trailing bytes after {grid.size} values")
    values = np.frombuffer(body, dtype="<c16").astype(np.complex128)
    return State(grid, t, values), meta


def load_checkpoint(path, grid: Optional[Grid] = None, params: Optional[PhysParams] = None) -> State:
    """Load a checkpoint, optionally checking it against the expected
    grid and parameters."""
    state, meta = read_checkpoint(path)
    if grid is not None and state.grid != grid:
        raise CheckpointConsistencyError(
            f"{path}: checkpoint grid {state.grid.to_dict()} does not match {grid.to_dict()}"
        )
    if params is not None and "params" in meta and meta["params"] != params.to_dict():
        raise CheckpointConsistencyError(f"{path}: checkpoint params {meta['params']} differ")
    return state


def _fmt(v: float) -> str:
    return format(v, ".17g")


def write_observables_csv(samples: Iterable[ObservableSample], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for s in samples:
            writer.writerow([_fmt(v) for v in s.row()])
    return path


def read_observables_csv(path) -> list[ObservableSample]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_FIELDS:
            raise ValueError(f"{path}: unexpected header {header}")
        return [ObservableSample.from_row(row) for row in reader]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return None
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path
