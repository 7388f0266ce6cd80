"""
Seeded parameter sampling and train/validation splits.
"""

from typing import List, Tuple

import numpy as np

from ..core.params import ParamRanges, QubitParams

DEDUP_RESOLUTION_GHZ = 1e-6


def sample_params(n: int, ranges: ParamRanges = None, seed: int = 0) -> List[QubitParams]:
    """
    Draw n distinct triples, uniform and independent per axis.

    Triples that coincide with an earlier draw at 1e-6 GHz resolution are redrawn.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative (got {n})")
    ranges = ranges or ParamRanges()
    rng = np.random.default_rng(seed)
    seen = set()
    out: List[QubitParams] = []
    while len(out) < n:
        values = rng.uniform(ranges.lows, ranges.highs)
        key = tuple(np.round(values / DEDUP_RESOLUTION_GHZ).astype(np.int64).tolist())
        if key in seen:
            continue
        seen.add(key)
        out.append(QubitParams.from_array(values))
    return out


def split_indices(n: int, validation_fraction: float = 0.1, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded (train, validation) index split; validation gets at least one entry when n > 1."""
    order = np.random.default_rng(seed).permutation(n)
    n_val = int(round(validation_fraction * n))
    if n > 1:
        n_val = min(max(n_val, 1), n - 1)
    else:
        n_val = 0
    return np.sort(order[n_val:]), np.sort(order[:n_val])
