"""
Spectrum point sets: the currency between simulator, preprocessing, labeling and fitting.

Text format (CSV):

    # provenance=simulated-pure
    phi_ext_rad,freq_ghz,magnitude,label
    0.0,5.65685424949238,,0-2

Empty magnitude/label cells mean "absent".
"""

import csv
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ConfigError, DatasetIOError

logger = logging.getLogger(__name__)

Label = Tuple[int, int]
HEADER = ["phi_ext_rad", "freq_ghz", "magnitude", "label"]


class Provenance(Enum):
    SIMULATED_PURE = "simulated-pure"
    SIMULATED_DISPERSIVE = "simulated-dispersive"
    MEASURED = "measured"


def format_label(label: Optional[Label]) -> str:
    return "" if label is None else f"{label[0]}-{label[1]}"


def parse_label(text: str) -> Optional[Label]:
    text = text.strip()
    if not text:
        return None
    try:
        i, j = text.split("-")
        return int(i), int(j)
    except ValueError:
        raise ConfigError(f"Malformed transition label '{text}' (expected 'i-j')")


@dataclass(frozen=True)
class SpectrumPoint:
    phi_ext: float
    frequency: float
    magnitude: Optional[float] = None
    label: Optional[Label] = None

    def key(self) -> tuple:
        return (self.phi_ext, self.frequency, self.label)


@dataclass
class SpectrumPointSet:
    """Ordered, duplicate-free collection of spectrum points."""
    points: List[SpectrumPoint] = field(default_factory=list)
    provenance: Provenance = Provenance.MEASURED
    sim_config: Optional[object] = None

    def __post_init__(self):
        seen = set()
        unique = []
        for point in self.points:
            key = point.key()
            if key in seen:
                continue
            seen.add(key)
            unique.append(point)
        if len(unique) != len(self.points):
            logger.debug(f"Dropped {len(self.points) - len(unique)} duplicate points")
        self.points = unique

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[SpectrumPoint]:
        return iter(self.points)

    @property
    def fluxes(self) -> np.ndarray:
        return np.array([p.phi_ext for p in self.points], dtype=np.float64)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([p.frequency for p in self.points], dtype=np.float64)

    @property
    def magnitudes(self) -> np.ndarray:
        """Magnitudes with NaN where absent."""
        return np.array(
            [np.nan if p.magnitude is None else p.magnitude for p in self.points],
            dtype=np.float64,
        )

    @property
    def labels(self) -> List[Optional[Label]]:
        return [p.label for p in self.points]

    def is_fully_labeled(self) -> bool:
        return all(p.label is not None for p in self.points)

    def derive(self, points: Sequence[SpectrumPoint], provenance: Provenance = None) -> "SpectrumPointSet":
        """New set with the same metadata and different points."""
        return SpectrumPointSet(
            points=list(points),
            provenance=provenance or self.provenance,
            sim_config=self.sim_config,
        )

    def unlabeled(self) -> "SpectrumPointSet":
        return self.derive([replace(p, label=None) for p in self.points])

    def keys(self) -> set:
        return {p.key() for p in self.points}


def write_points(points: SpectrumPointSet, path) -> Path:
    """Write a point set as CSV text with full float precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(f"# provenance={points.provenance.value}\n")
        writer = csv.writer(f)
        writer.writerow(HEADER)
        for p in points:
            writer.writerow([
                repr(float(p.phi_ext)),
                repr(float(p.frequency)),
                "" if p.magnitude is None else repr(float(p.magnitude)),
                format_label(p.label),
            ])
    return path


def read_points(path) -> SpectrumPointSet:
    """Read a point set written by write_points."""
    path = Path(path)
    if not path.exists():
        raise DatasetIOError(f"Point set file not found: {path}", path=path)
    provenance = Provenance.MEASURED
    points = []
    with open(path, "r", newline="") as f:
        rows = [line for line in f if line.strip()]
    body = []
    for line in rows:
        if line.startswith("#"):
            text = line[1:].strip()
            if text.startswith("provenance="):
                try:
                    provenance = Provenance(text.split("=", 1)[1].strip())
                except ValueError:
                    raise ConfigError(f"Unknown provenance in {path}: {text}")
            continue
        body.append(line)
    reader = csv.reader(body)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != HEADER:
        raise ConfigError(f"Point set {path} must start with header {','.join(HEADER)}")
    for row_index, row in enumerate(reader):
        try:
            phi, freq, magnitude, label = (row + [""] * 4)[:4]
            points.append(SpectrumPoint(
                phi_ext=float(phi),
                frequency=float(freq),
                magnitude=float(magnitude) if magnitude.strip() else None,
                label=parse_label(label),
            ))
        except ValueError as e:
            raise DatasetIOError(f"Bad row {row_index} in {path}: {e}", entry_index=row_index, path=path)
    return SpectrumPointSet(points=points, provenance=provenance)
