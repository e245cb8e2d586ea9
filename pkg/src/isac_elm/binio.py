"""Flat binary container: JSON header followed by little-endian float64 arrays.

Layout::

    b"ISACELM1"                 8-byte magic
    <u8 header length>          little-endian uint64
    <header JSON, utf-8>        includes an "arrays" list of {name, shape}
    <array bytes>               each array as '<f8', C order, in header order
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError

MAGIC = b"ISACELM1"


def write_blob(path: str | Path, header: dict, arrays: dict[str, np.ndarray]) -> None:
    header = dict(header)
    header["arrays"] = [{"name": k, "shape": list(np.shape(v))} for k, v in arrays.items()]
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(raw)))
        fh.write(raw)
        for value in arrays.values():
            fh.write(np.ascontiguousarray(value, dtype="<f8").tobytes())


def read_blob(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise InvalidArgumentError(f"{path} is not an isac_elm binary file")
    (n,) = struct.unpack("<Q", data[8:16])
    try:
        header = json.loads(data[16:16 + n].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InvalidArgumentError(f"{path}: corrupt header") from exc
    offset = 16 + n
    arrays = {}
    for entry in header.pop("arrays"):
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        if offset + 8 * count > len(data):
            raise InvalidArgumentError(f"{path}: truncated array data")
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
        arrays[entry["name"]] = arr.reshape(shape).astype(np.float64)
        offset += 8 * count
    if offset != len(data):
        raise InvalidArgumentError(f"{path}: trailing or missing array data")
    return header, arrays
