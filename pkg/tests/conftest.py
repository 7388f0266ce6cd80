"""
Pytest configuration and shared fixtures.
"""

import pytest
from pathlib import Path
import sys

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from fluxfit.core.params import ParamRanges, QubitParams  # noqa: E402


@pytest.fixture
def reference_params():
    """Case used throughout the fitting studies: E_C=1.5, E_L=0.7, E_J=6.5 GHz."""
    return QubitParams(1.5, 0.7, 6.5)


@pytest.fixture
def harmonic_params():
    """E_J = 0: pure LC oscillator with level spacing sqrt(8) GHz."""
    return QubitParams(1.0, 1.0, 0.0)


@pytest.fixture
def demo_params():
    """Spectrum shown in the flux-dependence demo: E_C=1, E_L=1, E_J=4 GHz."""
    return QubitParams(1.0, 1.0, 4.0)


@pytest.fixture
def small_grid_config():
    """16 x 16 raster for fast model tests."""
    from fluxfit.data.raster import GridConfig
    return GridConfig(n_flux_bins=16, n_freq_bins=16)


@pytest.fixture
def small_model_config():
    """One conv block and a 16-wide head, matching small_grid_config."""
    from fluxfit.model.network import ConvBlock, ModelConfig
    return ModelConfig(input_dims=(16, 16), conv_blocks=[ConvBlock(channels=4)], head_widths=[16], seed=0)


@pytest.fixture(scope="session")
def small_entries():
    """16 pure-spectrum dataset entries on a 16 x 16 raster."""
    from fluxfit.data import DatasetEntry, GridConfig, rasterize, sample_params
    from fluxfit.sim import Provenance, SimConfig, pure_spectrum

    grid = GridConfig(n_flux_bins=16, n_freq_bins=16)
    sim = SimConfig(flux_points=32)
    entries = []
    for params in sample_params(16, ParamRanges(), seed=3):
        points = pure_spectrum(params, sim)
        entries.append(DatasetEntry(params, rasterize(points, grid), Provenance.SIMULATED_PURE, len(points)))
    return entries


@pytest.fixture
def temp_test_file(tmp_path):
    """Create a temporary test file."""
    def _create_file(filename, content):
        file_path = tmp_path / filename
        file_path.write_text(content)
        return file_path
    return _create_file


def pytest_addoption(parser):
    """Add custom command line options."""
    parser.addoption(
        "--acceptance",
        action="store_true",
        default=False,
        help="Run the desk-scale acceptance suite (trains a model, takes a while)"
    )


def pytest_collection_modifyitems(config, items):
    """Modify test collection based on command line options."""
    if not config.getoption("--acceptance"):
        skip_acceptance = pytest.mark.skip(reason="need --acceptance option to run")
        for item in items:
            if "acceptance" in item.keywords:
                item.add_marker(skip_acceptance)
