"""Versioned model file format.

Layout::

    magic        4 bytes   b"SOFM"
    version      uint16    big-endian
    length       uint64    big-endian, byte length of the payload
    sha256       32 bytes  digest of the payload
    payload      zlib-compressed UTF-8 JSON

Trees are stored in preorder as flat node lists, so loading never recurses.
"""

import hashlib
import json
import logging
import struct
import zlib
from pathlib import Path
from typing import Any, Dict

from .calibrate import CrossoverCalibration
from .config_builder import TrainConfig
from .forest import Forest, flatten_tree, unflatten_tree

logger = logging.getLogger(__name__)

MAGIC = b'SOFM'
FORMAT_VERSION = 1
_HEADER = struct.Struct('>4sHQ32s')


class ModelFormatError(ValueError):
    """Raised when a model file is not a readable forest."""


def forest_to_dict(forest: Forest) -> Dict[str, Any]:
    return {
        'class_count': forest.class_count,
        'n_features': forest.n_features,
        'label_names': list(forest.label_names),
        'value_dtype': forest.value_dtype,
        'config': forest.config.to_dict(),
        'calibration': forest.calibration.to_dict() if forest.calibration else None,
        'trees': [flatten_tree(tree) for tree in forest.trees],
    }


def forest_from_dict(data: Dict[str, Any]) -> Forest:
    calibration = data.get('calibration')
    return Forest(
        trees=tuple(unflatten_tree(nodes) for nodes in data['trees']),
        class_count=int(data['class_count']),
        n_features=int(data['n_features']),
        label_names=tuple(data['label_names']),
        config=TrainConfig.from_dict(data['config']),
        calibration=CrossoverCalibration.from_dict(calibration) if calibration else None,
        value_dtype=data['value_dtype'],
    )


def save_model(forest: Forest, path: str):
    """
    Write a forest to disk.

    Args:
        forest: Trained forest
        path: Output file path (parent directories are created)
    """
    payload = zlib.compress(json.dumps(forest_to_dict(forest)).encode('utf-8'))
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, len(payload), hashlib.sha256(payload).digest())

    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_bytes(header + payload)
    logger.info("Saved %d-tree model to %s", len(forest.trees), output_path)


def load_model(path: str) -> Forest:
    """
    Read a forest written by save_model.

    Raises:
        FileNotFoundError: If the file doesn't exist
        ModelFormatError: On bad magic, version mismatch, truncation,
            checksum failure or a malformed payload
    """
    model_path = Path(path)
    if not model_path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    blob = model_path.read_bytes()

    if len(blob) < _HEADER.size:
        raise ModelFormatError(f"Truncated model file: {len(blob)} bytes")
    magic, version, length, digest = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ModelFormatError(f"Not a model file (magic {magic!r})")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"Unsupported model version {version}, expected {FORMAT_VERSION}")

    payload = blob[_HEADER.size:]
    if len(payload) < length:
        raise ModelFormatError(f"Truncated model file: payload {len(payload)} of {length} bytes")
    payload = payload[:length]
    if hashlib.sha256(payload).digest() != digest:
        raise ModelFormatError("Model checksum mismatch")

    try:
        data = json.loads(zlib.decompress(payload).decode('utf-8'))
        return forest_from_dict(data)
    except (zlib.error, ValueError, KeyError, IndexError, TypeError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"Malformed model payload: {exc}") from exc
