"""
Model file format.

    b"FXNN"                    magic
    u32                        schema version
    u32 + UTF-8 JSON           config block (architecture and raster grid)
    u32 + UTF-8 JSON           normalisation block
    u32 + UTF-8 JSON           provenance block
    u32                        parameter count
    per parameter:
        u32 + UTF-8            name
        u32 ndim, ndim x u32   shape
        float32 LE             data, row-major

All integers little-endian. JSON blocks use sorted keys so that
save -> load -> save is byte-identical.

Parameters are always stored as float32. A float64 network (as built for
gradient checks) is written with a warning and loads back as float32 weights
equal to value.astype(float32).
"""

import json
import logging
import struct
from pathlib import Path

import numpy as np

from .. import config
from ..core.params import ParamRanges
from ..data.raster import GridConfig
from ..errors import DatasetIOError, SchemaError, ShapeError
from .network import ModelConfig, build_network
from .training import TrainedModel, TrainingProvenance

logger = logging.getLogger(__name__)

_U32 = struct.Struct("<I")


def _json_block(data: dict) -> bytes:
    raw = json.dumps(data, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return _U32.pack(len(raw)) + raw


def encode_model(model: TrainedModel) -> bytes:
    parts = [config.MODEL_MAGIC, _U32.pack(config.MODEL_SCHEMA_VERSION)]
    parts.append(_json_block({
        "model": model.config.model_dump(mode="json"),
        "grid": model.grid_config.model_dump(mode="json"),
    }))
    parts.append(_json_block({
        "ranges": model.target_normalization.model_dump(mode="json"),
        "targets_normalized": model.targets_normalized,
    }))
    parts.append(_json_block(model.provenance.to_dict()))

    params = model.network.named_params()
    wide = sorted({str(value.dtype) for _, value in params if value.dtype != np.float32})
    if wide:
        logger.warning(f"Storing {', '.join(wide)} model parameters as float32; precision is reduced")
    parts.append(_U32.pack(len(params)))
    for name, value in params:
        encoded = name.encode("utf-8")
        parts.append(_U32.pack(len(encoded)) + encoded)
        parts.append(_U32.pack(value.ndim) + b"".join(_U32.pack(d) for d in value.shape))
        parts.append(np.ascontiguousarray(value, dtype="<f4").tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, blob: bytes, source: str):
        self.blob = blob
        self.pos = 0
        self.source = source

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise SchemaError(f"Model file {self.source} is truncated at byte {self.pos}")
        chunk = self.blob[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]

    def json(self) -> dict:
        try:
            return json.loads(self.take(self.u32()).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise SchemaError(f"Model file {self.source} has a corrupt header block: {e}")


def decode_model(blob: bytes, source: str = "<bytes>") -> TrainedModel:
    reader = _Reader(blob, source)
    if reader.take(len(config.MODEL_MAGIC)) != config.MODEL_MAGIC:
        raise SchemaError(f"{source} is not a fluxfit model file")
    version = reader.u32()
    if version != config.MODEL_SCHEMA_VERSION:
        raise SchemaError(
            f"Unsupported model schema version {version} (supported: {config.MODEL_SCHEMA_VERSION})"
        )
    try:
        head = reader.json()
        model_cfg = ModelConfig(**head["model"])
        grid_cfg = GridConfig(**head["grid"])
        norm = reader.json()
        ranges = ParamRanges(**norm["ranges"])
        provenance = TrainingProvenance.from_dict(reader.json())
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"Model file {source} has invalid metadata: {e}")

    network = build_network(model_cfg)
    expected = dict(network.named_params())
    count = reader.u32()
    if count != len(expected):
        raise SchemaError(f"Model file {source} holds {count} parameters, architecture has {len(expected)}")
    for _ in range(count):
        name = reader.take(reader.u32()).decode("utf-8", errors="replace")
        shape = tuple(reader.u32() for _ in range(reader.u32()))
        size = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(reader.take(4 * size), dtype="<f4").reshape(shape)
        if name not in expected:
            raise SchemaError(f"Model file {source} has unknown parameter {name}")
        try:
            network.assign(name, data.astype(np.float32))
        except ShapeError as e:
            raise SchemaError(f"Model file {source}: {e.message}")
    if reader.pos != len(blob):
        raise SchemaError(f"Model file {source} has {len(blob) - reader.pos} trailing bytes")

    return TrainedModel(
        network=network,
        config=model_cfg,
        target_normalization=ranges,
        provenance=provenance,
        grid_config=grid_cfg,
        targets_normalized=bool(norm.get("targets_normalized", True)),
    )


def persist_model(model: TrainedModel, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_model(model))
    logger.info(f"Saved {model.provenance.stage.value} model to {path}")
    return path


def load_model(path) -> TrainedModel:
    path = Path(path)
    if not path.exists():
        raise DatasetIOError(f"Model file not found: {path}", path=path)
    return decode_model(path.read_bytes(), str(path))
