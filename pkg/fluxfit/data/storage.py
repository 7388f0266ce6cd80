"""
Dataset persistence.

Grid file: 8-byte magic (b"FXGD" + version bytes), u32 rows, u32 cols, then
rows x cols float32 little-endian, row-major.

Manifest (JSON): schema_version, seed, ranges, configs and one record per entry
{e_c, e_l, e_j, provenance, path, n_points}; paths are relative to the manifest.
The manifest is written last, through a temporary file and a rename.
"""

import json
import logging
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .. import config
from ..core.params import ParamRanges, QubitParams
from ..errors import DatasetIOError, InvalidParameterError, SchemaError
from ..sim.points import Provenance
from .raster import GridConfig, RasterGrid

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<II")
GRID_DIR = "grids"


@dataclass
class DatasetEntry:
    """One training example: parameters and rendered grid."""
    params: QubitParams
    grid: RasterGrid
    provenance: Provenance
    n_points: int = 0


class ManifestEntry(BaseModel):
    """One manifest record; energies in GHz, path relative to the manifest."""
    model_config = ConfigDict(frozen=True)

    e_c: float
    e_l: float
    e_j: float
    provenance: Provenance
    path: str
    n_points: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_params(self):
        try:
            QubitParams(self.e_c, self.e_l, self.e_j)
        except InvalidParameterError as e:
            raise ValueError(e.message)
        return self

    @property
    def params(self) -> QubitParams:
        return QubitParams(self.e_c, self.e_l, self.e_j)

    @classmethod
    def of(cls, params: QubitParams, path: str, provenance: Provenance, n_points: int = 0) -> "ManifestEntry":
        return cls(**params.to_dict(), provenance=provenance, path=path, n_points=n_points)


class DatasetManifest(BaseModel):
    model_config = ConfigDict(frozen=True)

    schema_version: int = config.DATASET_SCHEMA_VERSION
    seed: int
    ranges: ParamRanges
    grid: GridConfig
    configs: Dict[str, Any] = Field(default_factory=dict)
    entries: List[ManifestEntry]

    @property
    def grid_config(self) -> GridConfig:
        return self.grid

    def to_dict(self) -> dict:
        return self.model_dump(mode="json")

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetManifest":
        version = data.get("schema_version")
        if version != config.DATASET_SCHEMA_VERSION:
            raise SchemaError(
                f"Unsupported dataset schema_version {version} "
                f"(supported: {config.DATASET_SCHEMA_VERSION})"
            )
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise SchemaError(f"Malformed dataset manifest: {e}")


def write_grid(path, values: np.ndarray) -> Path:
    path = Path(path)
    values = np.ascontiguousarray(values, dtype="<f4")
    rows, cols = values.shape
    with open(path, "wb") as f:
        f.write(config.GRID_MAGIC)
        f.write(_HEADER.pack(rows, cols))
        f.write(values.tobytes(order="C"))
    return path


def read_grid(path, entry_index: Optional[int] = None) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise DatasetIOError(f"Grid file missing for entry {entry_index}: {path}", entry_index, path)
    blob = path.read_bytes()
    head = len(config.GRID_MAGIC) + _HEADER.size
    if len(blob) < head or blob[:len(config.GRID_MAGIC)] != config.GRID_MAGIC:
        raise DatasetIOError(f"Corrupt grid header for entry {entry_index}: {path}", entry_index, path)
    rows, cols = _HEADER.unpack(blob[len(config.GRID_MAGIC):head])
    if len(blob) != head + 4 * rows * cols:
        raise DatasetIOError(
            f"Grid file for entry {entry_index} has {len(blob) - head} data bytes, "
            f"expected {4 * rows * cols}: {path}",
            entry_index,
            path,
        )
    return np.frombuffer(blob, dtype="<f4", offset=head).reshape(rows, cols).astype(np.float32)


def _atomic_write_json(path: Path, data: dict):
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp, path)


def persist_dataset(
    entries: Sequence[DatasetEntry],
    manifest_path,
    ranges: ParamRanges,
    seed: int,
    configs: Dict[str, Any] = None,
) -> DatasetManifest:
    """
    Write one grid file per entry, then the manifest.

    Args:
        entries: Examples to store (all grids must share one GridConfig)
        manifest_path: Target manifest file; grids go to <dir>/grids/
        ranges: Sampling ranges recorded in the manifest
        seed: Sampling seed recorded in the manifest
        configs: Extra config echo (simulation/readout settings)

    Returns:
        The written manifest
    """
    manifest_path = Path(manifest_path)
    grid_dir = manifest_path.parent / GRID_DIR
    grid_dir.mkdir(parents=True, exist_ok=True)
    grid_config = entries[0].grid.grid_config if entries else GridConfig()

    records = []
    for index, entry in enumerate(entries):
        relative = f"{GRID_DIR}/entry_{index:05d}.fxgd"
        write_grid(manifest_path.parent / relative, entry.grid.values)
        records.append(ManifestEntry.of(entry.params, relative, entry.provenance, entry.n_points))

    manifest = DatasetManifest(
        entries=records, ranges=ranges, seed=seed, grid=grid_config, configs=configs or {}
    )
    _atomic_write_json(manifest_path, manifest.to_dict())
    logger.info(f"Wrote dataset manifest {manifest_path} with {len(records)} entries")
    return manifest


def load_manifest(manifest_path) -> DatasetManifest:
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise DatasetIOError(f"Manifest not found: {manifest_path}", path=manifest_path)
    try:
        with open(manifest_path, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"Manifest {manifest_path} is not valid JSON: {e}")
    return DatasetManifest.from_dict(data)


def load_dataset(manifest_path) -> Tuple[DatasetManifest, List[DatasetEntry]]:
    """Load the manifest and every grid; fails before reading grids on schema mismatch."""
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    entries = []
    for index, record in enumerate(manifest.entries):
        values = read_grid(manifest_path.parent / record.path, entry_index=index)
        if values.shape != manifest.grid_config.shape:
            raise DatasetIOError(
                f"Grid of entry {index} has shape {values.shape}, "
                f"manifest declares {manifest.grid_config.shape}",
                index,
                record.path,
            )
        entries.append(DatasetEntry(
            params=record.params,
            grid=RasterGrid(values=values, grid_config=manifest.grid_config),
            provenance=record.provenance,
            n_points=record.n_points,
        ))
    return manifest, entries


def stack_entries(entries: Sequence[DatasetEntry]) -> Tuple[np.ndarray, np.ndarray]:
    """(inputs of shape (N, 1, rows, cols) float32, targets of shape (N, 3) float64)."""
    inputs = np.stack([e.grid.values for e in entries])[:, None, :, :].astype(np.float32)
    targets = np.stack([e.params.as_array() for e in entries])
    return inputs, targets
