"""Checkpoint files: one JSON header line, then a flat float64 blob.

The header records the run kind, step counters, rng state, network specs,
tensor directory (name, shape, byte offset) and a CRC of the blob, so a
truncated or corrupted file fails validation before any tensor loads.
"""

from __future__ import annotations

import json
import zlib
from pathlib import Path

import numpy as np

FORMAT_TAG = "gazesim-checkpoint-v1"


class CheckpointError(RuntimeError):
    pass


def _flatten_tensors(groups: dict) -> list:
    """groups: {group_name: {tensor_name: array}} -> sorted flat list."""
    flat = []
    for gname in sorted(groups):
        for tname in sorted(groups[gname]):
            flat.append((f"{gname}/{tname}", np.asarray(groups[gname][tname],
                                                        dtype=np.float64)))
    return flat


def save_checkpoint(path, *, kind: str, step: int, iteration: int,
                    rng_state: dict, specs: dict, tensors: dict,
                    scalars: dict | None = None) -> None:
    """Write header + blob atomically (via a temp file rename)."""
    flat = _flatten_tensors(tensors)
    directory = []
    blob_parts = []
    offset = 0
    for name, arr in flat:
        data = np.ascontiguousarray(arr).tobytes()
        directory.append({"name": name, "shape": list(arr.shape),
                          "offset": offset, "nbytes": len(data)})
        blob_parts.append(data)
        offset += len(data)
    blob = b"".join(blob_parts)
    header = {
        "format": FORMAT_TAG,
        "kind": kind,
        "step": int(step),
        "iteration": int(iteration),
        "rng_state": rng_state,
        "specs": specs,
        "scalars": scalars or {},
        "tensors": directory,
        "total_bytes": len(blob),
        "crc32": zlib.crc32(blob),
    }
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode())
        f.write(b"\n")
        f.write(blob)
    tmp.replace(path)


def load_checkpoint(path) -> dict:
    """Validate and load; returns header plus {"tensors": {group: {name: arr}}}."""
    path = Path(path)
    with open(path, "rb") as f:
        header_line = f.readline()
        blob = f.read()
    try:
        header = json.loads(header_line.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: unreadable checkpoint header: {e}")
    if header.get("format") != FORMAT_TAG:
        raise CheckpointError(
            f"{path}: not a {FORMAT_TAG} file (format={header.get('format')!r})")
    if len(blob) != header["total_bytes"]:
        raise CheckpointError(
            f"{path}: blob is {len(blob)} bytes, header says "
            f"{header['total_bytes']} (truncated?)")
    if zlib.crc32(blob) != header["crc32"]:
        raise CheckpointError(f"{path}: blob checksum mismatch (corrupt)")

    groups: dict[str, dict[str, np.ndarray]] = {}
    for entry in header["tensors"]:
        raw = blob[entry["offset"]:entry["offset"] + entry["nbytes"]]
        arr = np.frombuffer(raw, dtype=np.float64).reshape(entry["shape"]).copy()
        gname, tname = entry["name"].split("/", 1)
        groups.setdefault(gname, {})[tname] = arr
    header["tensors"] = groups
    return header
