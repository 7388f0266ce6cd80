"""Training data: parameter sampling, rasterization, dataset files."""

from .sampling import sample_params, split_indices
from .raster import GridConfig, IntensityMode, RasterGrid, rasterize
from .storage import (
    DatasetEntry,
    DatasetManifest,
    ManifestEntry,
    load_dataset,
    load_manifest,
    persist_dataset,
    read_grid,
    stack_entries,
    write_grid,
)
from .generate import MANIFEST_NAME, generate_dataset, simulate_entry

__all__ = [
    "sample_params", "split_indices", "GridConfig", "IntensityMode", "RasterGrid", "rasterize",
    "DatasetEntry", "DatasetManifest", "ManifestEntry", "load_dataset", "load_manifest",
    "persist_dataset", "read_grid", "stack_entries", "write_grid",
    "MANIFEST_NAME", "generate_dataset", "simulate_entry",
]
