"""Model checkpoint files.

Layout (all little-endian)::

    8 bytes   magic b"SLDMASK\\0"
    uint32    format version
    uint32    length of the model config JSON
    bytes     model config JSON (UTF-8, sorted keys)
    32 bytes  SHA-256 digest of the config JSON
    uint64    number of parameters
    float64[] parameters, flattened in declaration order
"""
from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from ..errors import DataError
from .model import MaskEstimator, ModelConfig

MAGIC = b"SLDMASK\0"
VERSION = 1


def config_digest(config: ModelConfig) -> bytes:
    return hashlib.sha256(config.to_json().encode()).digest()


def save_checkpoint(path, model: MaskEstimator) -> None:
    blob = model.config.to_json().encode()
    flat = model.get_flat()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(blob)))
        fh.write(blob)
        fh.write(hashlib.sha256(blob).digest())
        fh.write(struct.pack("<Q", flat.size))
        fh.write(flat.astype("<f8").tobytes())


def load_checkpoint(path) -> MaskEstimator:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise DataError(f"{path}: not a model checkpoint")
    try:
        version, n_blob = struct.unpack_from("<II", data, 8)
        if version != VERSION:
            raise DataError(f"{path}: unsupported checkpoint version {version}")
        pos = 16
        blob = data[pos : pos + n_blob]
        pos += n_blob
        digest = data[pos : pos + 32]
        pos += 32
        if hashlib.sha256(blob).digest() != digest:
            raise DataError(f"{path}: config digest mismatch")
        (n_params,) = struct.unpack_from("<Q", data, pos)
        pos += 8
        config = ModelConfig.from_dict(json.loads(blob))
    except (struct.error, ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"{path}: corrupt checkpoint ({exc})") from exc
    body = data[pos:]
    if len(body) != 8 * n_params:
        raise DataError(f"{path}: expected {n_params} parameters, found {len(body) // 8}")
    model = MaskEstimator(config)
    model.set_flat(np.frombuffer(body, dtype="<f8"))
    return model
