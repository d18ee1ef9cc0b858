"""Checkpoint files.

Layout: the magic bytes ``FOLDS1\\n``, an 8-byte little-endian unsigned
header length, a UTF-8 JSON header (model config plus the ordered
parameter name/shape list), then little-endian float32 values of every
parameter concatenated in header order.
"""

import json
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import ValidationError

from seqfold.models.settings import ModelSettings
from seqfold.network.model import FoldPolicyNet
from seqfold.utils.exceptions import CheckpointError

MAGIC = b"FOLDS1\n"
_FLOAT = np.dtype("<f4")

logger = logging.getLogger(__name__)


def save_checkpoint(model: FoldPolicyNet, path: Union[str, Path]) -> Path:
    """Write ``model`` to ``path``.

    Raises:
        CheckpointError: If the file cannot be written
    """
    path = Path(path)
    params = model.parameters()
    header = {
        "config": model.config.model_dump(mode="json"),
        "parameters": [
            {"name": p.name, "shape": list(p.data.shape)} for p in params
        ],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<Q", len(header_bytes)))
            f.write(header_bytes)
            for param in params:
                f.write(param.data.astype(_FLOAT).tobytes(order="C"))
    except OSError as e:
        raise CheckpointError(
            f"Failed to write checkpoint {path}", detail=str(e)
        )
    logger.info(f"Saved checkpoint with {len(params)} tensors to {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> FoldPolicyNet:
    """Rebuild a model from a checkpoint file.

    Raises:
        CheckpointError: If the file is missing, truncated or malformed
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint {path}", detail=str(e))

    if not raw.startswith(MAGIC):
        raise CheckpointError(f"Not a checkpoint file: {path}")
    offset = len(MAGIC)
    if len(raw) < offset + 8:
        raise CheckpointError(f"Truncated checkpoint header: {path}")
    (header_len,) = struct.unpack_from("<Q", raw, offset)
    offset += 8
    try:
        header = json.loads(raw[offset : offset + header_len].decode("utf-8"))
        config = ModelSettings.model_validate(header["config"])
    except (ValueError, KeyError, ValidationError) as e:
        raise CheckpointError(f"Bad checkpoint header: {path}", detail=str(e))
    offset += header_len

    model = FoldPolicyNet(config)
    expected = model.bank.names()
    stored = [entry["name"] for entry in header["parameters"]]
    if stored != expected:
        raise CheckpointError(
            f"Checkpoint parameters do not match the model: {path}",
            detail=f"{len(stored)} stored, {len(expected)} expected",
        )
    for entry in header["parameters"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        end = offset + count * _FLOAT.itemsize
        if end > len(raw):
            raise CheckpointError(
                f"Truncated checkpoint data: {path}",
                detail=f"parameter {entry['name']}",
            )
        values = np.frombuffer(raw, dtype=_FLOAT, count=count, offset=offset)
        param = model.bank[entry["name"]]
        if param.data.shape != shape:
            raise CheckpointError(
                f"Shape mismatch for {entry['name']}",
                detail=f"{shape} vs {param.data.shape}",
            )
        param.data = values.reshape(shape).astype(model.dtype)
        param.zero_grad()
        offset = end
    if offset != len(raw):
        raise CheckpointError(f"Trailing bytes in checkpoint: {path}")
    logger.debug(f"Loaded checkpoint {path}")
    return model
