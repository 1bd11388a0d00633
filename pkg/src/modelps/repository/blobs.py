"""Content-addressed blob store and the weights container format.

Blobs live under ``<store>/blobs/<sha256>`` and are immutable once written,
so concurrent writers of the same content are harmless. Reads populate an
in-process cache (unbounded by design; see module docs).

Weights container layout::

    uint32 LE header length | header JSON (UTF-8) | packed float32 LE data

The header maps node_id -> list of named tensors with byte offsets into the
data section.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
import threading
from pathlib import Path

import numpy as np

from ..errors import StoreCorrupt

Tensors = dict[str, dict[str, np.ndarray]]

_HEADER_STRUCT = struct.Struct("<I")


def encode_weights(tensors: Tensors) -> bytes:
    """Pack per-node float32 tensors; node ids and tensor names are sorted
    so identical weights always produce identical bytes."""
    header: dict = {"schema_version": "1", "tensors": {}}
    chunks: list[bytes] = []
    offset = 0
    for node_id in sorted(tensors):
        entries = []
        for name in sorted(tensors[node_id]):
            arr = np.ascontiguousarray(tensors[node_id][name], dtype="<f4")
            raw = arr.tobytes()
            entries.append({"name": name, "offset": offset, "shape": list(arr.shape)})
            chunks.append(raw)
            offset += len(raw)
        header["tensors"][node_id] = entries
    header_bytes = json.dumps(header, separators=(",", ":"), sort_keys=True).encode("utf-8")
    return _HEADER_STRUCT.pack(len(header_bytes)) + header_bytes + b"".join(chunks)


def decode_weights(blob: bytes) -> Tensors:
    if len(blob) < _HEADER_STRUCT.size:
        raise StoreCorrupt("<weights>", "blob shorter than header length field")
    (header_len,) = _HEADER_STRUCT.unpack_from(blob)
    start = _HEADER_STRUCT.size
    if len(blob) < start + header_len:
        raise StoreCorrupt("<weights>", "truncated header")
    try:
        header = json.loads(blob[start : start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise StoreCorrupt("<weights>", f"bad header: {exc}") from exc
    data = blob[start + header_len :]
    out: Tensors = {}
    for node_id, entries in header.get("tensors", {}).items():
        out[node_id] = {}
        for entry in entries:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            begin = entry["offset"]
            end = begin + count * 4
            if end > len(data):
                raise StoreCorrupt("<weights>", f"tensor {node_id}/{entry['name']} out of range")
            arr = np.frombuffer(data[begin:end], dtype="<f4").reshape(shape)
            out[node_id][entry["name"]] = arr.copy()
    return out


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class BlobStore:
    """Append-only file-backed blob store keyed by content hash."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, bytes] = {}
        self._lock = threading.Lock()

    def _path(self, ref: str) -> Path:
        return self.root / ref

    def put(self, data: bytes) -> str:
        ref = sha256_hex(data)
        path = self._path(ref)
        if not path.exists():
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                os.replace(tmp, path)
            finally:
                if os.path.exists(tmp):
                    os.unlink(tmp)
        with self._lock:
            self._cache[ref] = data
        return ref

    def get(self, ref: str) -> bytes:
        with self._lock:
            cached = self._cache.get(ref)
        if cached is not None:
            return cached
        path = self._path(ref)
        if not path.exists():
            raise StoreCorrupt(str(path), "blob missing")
        data = path.read_bytes()
        if sha256_hex(data) != ref:
            raise StoreCorrupt(str(path), "content does not match its hash")
        with self._lock:
            self._cache[ref] = data
        return data

    def has(self, ref: str) -> bool:
        with self._lock:
            if ref in self._cache:
                return True
        return self._path(ref).exists()
