"""
Static figures: measured points over model transition curves, and
Error / log10(Cost) contour maps of initial-value scans.
"""

import logging
import math
from pathlib import Path
from typing import Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .. import config  # noqa: E402
from ..core.hamiltonian import transition_frequencies  # noqa: E402
from ..core.params import QubitParams  # noqa: E402
from ..sim.points import SpectrumPointSet, format_label  # noqa: E402

logger = logging.getLogger(__name__)

CURVE_POINTS = 201


def plot_spectrum_overlay(
    path,
    params: QubitParams,
    labeled: SpectrumPointSet,
    outliers: Optional[SpectrumPointSet] = None,
    transitions: Sequence[Tuple[int, int]] = config.DEFAULT_TRANSITIONS,
    f_window: Tuple[float, float] = (config.F_MIN_GHZ, config.F_MAX_GHZ),
    title: str = None,
) -> Path:
    """Measured points (by label) with the model transition curves at params."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fluxes = np.linspace(0.0, 2.0 * math.pi, CURVE_POINTS)
    curves = transition_frequencies(params, fluxes, [tuple(t) for t in transitions])

    fig, ax = plt.subplots(figsize=(7, 5))
    for t, transition in enumerate(transitions):
        ax.plot(fluxes / math.pi, curves[:, t], lw=1.0, label=format_label(tuple(transition)))
    if len(labeled):
        ax.scatter(labeled.fluxes / math.pi, labeled.frequencies, s=6, c="k", label="labeled")
    if outliers is not None and len(outliers):
        ax.scatter(outliers.fluxes / math.pi, outliers.frequencies, s=6, c="r", marker="x",
                   label="outliers")
    ax.set_xlim(0.0, 2.0)
    ax.set_ylim(*f_window)
    ax.set_xlabel(r"$\varphi_{ext}/\pi$")
    ax.set_ylabel("frequency (GHz)")
    ax.set_title(title or str(params))
    ax.legend(fontsize=7, ncol=3, loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    logger.info(f"Wrote spectrum overlay {path}")
    return path


def plot_contours(path, contour) -> Path:
    """Side-by-side Error and log10(Cost) maps of a ContourData scan."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    x, y = np.meshgrid(contour.x_values, contour.y_values)
    truth = contour.case.to_dict()

    fig, axes = plt.subplots(1, 2, figsize=(11, 4.5))
    for ax, values, name in ((axes[0], contour.error, "Error"),
                             (axes[1], contour.log_cost, "log10(Cost)")):
        filled = ax.contourf(x, y, values, levels=20, cmap="viridis")
        fig.colorbar(filled, ax=ax)
        ax.plot(truth[contour.axes[0]], truth[contour.axes[1]], "r*", ms=10)
        ax.set_xlabel(f"{contour.axes[0]} (GHz)")
        ax.set_ylabel(f"{contour.axes[1]} (GHz)")
        ax.set_title(f"{name}, {contour.fixed_axis} = {contour.fixed_value:g} GHz")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    logger.info(f"Wrote contour plot {path}")
    return path
