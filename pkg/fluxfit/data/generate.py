"""
Dataset generation: sample -> simulate -> rasterize -> persist.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Tuple

import numpy as np

from ..core.params import ParamRanges, QubitParams
from ..sim.configs import ReadoutConfig, SimConfig
from ..sim.points import Provenance
from ..sim.readout import dispersive_spectrum
from ..sim.spectrum import pure_spectrum
from .raster import GridConfig, RasterGrid, rasterize
from .sampling import sample_params
from .storage import DatasetEntry, DatasetManifest, persist_dataset

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def simulate_entry(
    params: QubitParams,
    provenance: Provenance,
    sim: SimConfig,
    readout: ReadoutConfig,
    grid: GridConfig,
) -> Tuple[np.ndarray, int]:
    """Rendered grid values and point count for one parameter triple."""
    if provenance == Provenance.SIMULATED_DISPERSIVE:
        points = dispersive_spectrum(params, sim, readout)
    else:
        points = pure_spectrum(params, sim)
    return rasterize(points, grid).values, len(points)


def _simulate_job(job):
    return simulate_entry(*job)


def generate_dataset(
    out_dir,
    count: int,
    provenance: Provenance = Provenance.SIMULATED_PURE,
    ranges: ParamRanges = None,
    seed: int = 0,
    sim: SimConfig = None,
    readout: ReadoutConfig = None,
    grid: GridConfig = None,
    workers: int = 1,
) -> DatasetManifest:
    """
    Generate and persist a seeded dataset.

    Args:
        out_dir: Output directory (manifest.json and grids/ are created there)
        count: Number of entries
        provenance: simulated-pure or simulated-dispersive
        ranges: Parameter sampling ranges
        seed: Sampling seed
        sim, readout, grid: Simulation, readout and raster configs
        workers: Process count; results are merged in index order

    Returns:
        The written manifest
    """
    ranges = ranges or ParamRanges()
    sim = sim or SimConfig()
    readout = readout or ReadoutConfig()
    grid = grid or GridConfig()
    if provenance == Provenance.MEASURED:
        raise ValueError("Generated datasets are simulated-pure or simulated-dispersive")

    params_list = sample_params(count, ranges, seed)
    jobs = [(p, provenance, sim, readout, grid) for p in params_list]
    logger.info(f"Generating {count} {provenance.value} entries into {out_dir} (seed={seed})")

    results: List[Tuple[np.ndarray, int]] = []
    step = max(1, count // 10)
    if workers > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for index, result in enumerate(pool.map(_simulate_job, jobs, chunksize=8)):
                results.append(result)
                if (index + 1) % step == 0:
                    logger.info(f"{index + 1}/{count} entries simulated")
    else:
        for index, job in enumerate(jobs):
            results.append(_simulate_job(job))
            if (index + 1) % step == 0:
                logger.info(f"{index + 1}/{count} entries simulated")

    entries = [
        DatasetEntry(params=p, grid=RasterGrid(values=values, grid_config=grid),
                     provenance=provenance, n_points=n_points)
        for p, (values, n_points) in zip(params_list, results)
    ]
    configs = {
        "simulation": sim.model_dump(mode="json"),
        "readout": readout.model_dump(mode="json"),
        "provenance": provenance.value,
    }
    return persist_dataset(entries, Path(out_dir) / MANIFEST_NAME, ranges, seed, configs)
