"""
fluxfit configuration.

Constants for the simulator, dataset files, model files and the pipeline,
plus the loader for the optional per-stage JSON defaults file.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict

logger = logging.getLogger(__name__)

# Hamiltonian
# 110 states hold every retained level to 1e-6 GHz across sampled training
# triples. The corner E_L = 0.1, E_J = 10 drifts by a few 1e-5 GHz and needs
# basis_dim = 200 (SimConfig.basis_dim, FitConfig.basis_dim) for 1e-6.
DEFAULT_BASIS_DIM = 110
DEFAULT_N_LEVELS = 12

# Training ranges (GHz)
E_C_RANGE = (0.5, 3.0)
E_L_RANGE = (0.1, 2.0)
E_J_RANGE = (2.0, 10.0)
PREDICT_CLAMP_FACTOR = 1.25

# Spectrum window and transitions
FLUX_POINTS = 256
F_MIN_GHZ = 4.0
F_MAX_GHZ = 8.0
DEFAULT_TRANSITIONS = ((0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 2), (1, 3))

# Dispersive readout
RESONATOR_GHZ = 6.0
RESONATOR_LINEWIDTH_GHZ = 0.007
COUPLING_G_GHZ = 0.1
VISIBILITY_CUTOFF = 0.10
N_PERTURB_STATES = 20
NEAR_RESONANCE_GUARD = 1e-6  # GHz^2
RESONATOR_BAND_GHZ = 0.1

# Datasets
GRID_MAGIC = b"FXGD\x00\x00\x00\x01"
DATASET_SCHEMA_VERSION = 1
DESK_PURE_COUNT = 2048
DESK_DISPERSIVE_COUNT = 128

# Model files
MODEL_MAGIC = b"FXNN"
MODEL_SCHEMA_VERSION = 1
DEFAULT_LEARNING_RATE = 1e-3
LOW_INFORMATION_BINS = 64

# Fitting
LOG_COST_FLOOR = -18.0
STUDY_ITERATIONS = 5

# Labeling
LABEL_WINDOW_GHZ = 0.3

# Config directory holding fluxfit.json
CONFIG_DIR_ENV = "FLUXFIT_CONFIG_DIR"
DEFAULT_CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"
CONFIG_FILE_NAME = "fluxfit.json"

TOOL_NAME = "fluxfit"
TOOL_VERSION = "1.0.0"


def config_dir() -> Path:
    """Directory holding fluxfit.json (FLUXFIT_CONFIG_DIR or the repo config/)."""
    value = os.getenv(CONFIG_DIR_ENV)
    return Path(value) if value else DEFAULT_CONFIG_DIR


def load_defaults(directory: Path = None) -> Dict[str, Dict[str, Any]]:
    """
    Load per-stage default overrides.

    Args:
        directory: Directory containing fluxfit.json (defaults to config_dir())

    Returns:
        Mapping of stage name to keyword overrides; empty when no file exists
    """
    path = Path(directory or config_dir()) / CONFIG_FILE_NAME
    if not path.exists():
        return {}
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        from .errors import ConfigError
        raise ConfigError(f"Cannot read config file {path}: {e}")
    sections = {k: v for k, v in data.items() if not k.startswith("_")}
    logger.debug(f"Loaded defaults from {path}: {sorted(sections)}")
    return sections
