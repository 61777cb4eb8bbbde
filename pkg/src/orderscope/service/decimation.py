"""Series decimation for plot-sized responses.

Buckets the index range and keeps each bucket's minimum and maximum, so
a decimated series never hides an extreme: the global min and max are
always present. Opt-in via `max_points`; short series pass through.
"""

from __future__ import annotations

import numpy as np


def decimate_minmax(
    times: np.ndarray, values: np.ndarray, max_points: int
) -> tuple[np.ndarray, np.ndarray]:
    """Reduce (times, values) to at most *max_points* samples.

    Points are emitted in time order; each of roughly max_points/2
    buckets contributes its min and its max.
    """
    n = len(values)
    if max_points < 2:
        raise ValueError(f"max_points must be at least 2, got {max_points}")
    if n <= max_points:
        return times, values
    buckets = max_points // 2
    edges = np.linspace(0, n, buckets + 1).astype(int)
    keep: set[int] = set()
    for b in range(buckets):
        lo, hi = int(edges[b]), int(edges[b + 1])
        if hi <= lo:
            continue
        segment = values[lo:hi]
        keep.add(lo + int(np.argmin(segment)))
        keep.add(lo + int(np.argmax(segment)))
    order = np.array(sorted(keep), dtype=int)
    return times[order], values[order]
