"""Numerical kernels behind the measure builtins and detail views.

All functions are pure: they take arrays (or a windowed `Run`) and return
new arrays or small result records. The recurrence kernel is the
engine's main order parameter; it is kept in exact agreement with a
brute-force double loop (see tests), so any future optimization must be
bit-compatible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AnalysisError

DEFAULT_EXCLUSION_WIDTH = 10
DEFAULT_HISTOGRAM_BINS = 20


def recurrence_series(features: np.ndarray, width: int = DEFAULT_EXCLUSION_WIDTH) -> np.ndarray:
    """Closest-return distance at every step of a windowed trajectory.

    For step i the value is min over j with |j - i| >= width of
    ||x_i - x_j||, searched in both temporal directions within the given
    window. The exclusion half-width removes trivially adjacent
    neighbors; it is counted in steps, not time units. Zero everywhere
    for a trajectory that is exactly periodic with period >= width.

    Raises AnalysisError when the window is too short for every step to
    have at least one admissible partner (N >= max(width + 2, 2 * width)).
    """
    x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if width < 1:
        raise AnalysisError(f"exclusion width must be >= 1, got {width}")
    if n < max(width + 2, 2 * width):
        raise AnalysisError(
            f"window of {n} steps too short for exclusion width {width} "
            f"(need at least {max(width + 2, 2 * width)})"
        )
    out = np.empty(n)
    for i in range(n):
        sq = ((x - x[i]) ** 2).sum(axis=1)
        sq[max(0, i - width + 1): i + width] = np.inf
        out[i] = sq.min()
    return np.sqrt(out)


def distance_to_first(features: np.ndarray) -> np.ndarray:
    """Euclidean distance of every step to the window's first step."""
    x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 1:
        raise AnalysisError("need at least one sample")
    return np.sqrt(((x - x[0]) ** 2).sum(axis=1))


@dataclass(frozen=True)
class PcaResult:
    """Principal component decomposition of one windowed run.

    ``components`` holds all D orthonormal rows in descending eigenvalue
    order under a fixed sign convention (each row's largest-magnitude
    entry is positive; ties resolved to the lowest index).
    ``intrinsic_dim`` is the component count needed to reach the variance
    threshold, reported before any projection cap. ``projected`` has
    min(intrinsic_dim, max_components) columns. A constant trajectory is
    flagged ``degenerate`` with intrinsic_dim 0 and an empty projection.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance_ratio: np.ndarray
    intrinsic_dim: int
    projected: np.ndarray
    degenerate: bool = False


def pca(features: np.ndarray, var_threshold: float = 0.999,
        max_components: int | None = None) -> PcaResult:
    """PCA of a T x D trajectory via eigendecomposition of the D x D covariance.

    The data is centered by its temporal mean, never standardized (all
    dimensions share units). ``intrinsic_dim`` is the smallest n whose
    cumulative explained-variance ratio reaches ``var_threshold``; the
    projection is additionally capped at ``max_components`` columns.
    """
    if not 0.0 < var_threshold <= 1.0:
        raise AnalysisError(f"variance threshold must be in (0, 1], got {var_threshold}")
    if max_components is not None and max_components < 1:
        raise AnalysisError(f"max_components must be positive, got {max_components}")
    x = np.asarray(features, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise AnalysisError("PCA needs a 2-D trajectory with at least 2 samples")

    mean = x.mean(axis=0)
    centered = x - mean
    dim = x.shape[1]
    cov = centered.T @ centered / (x.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    components = eigvecs[:, order].T

    # Deterministic sign: flip each row so its largest-|.| entry is positive.
    pivot = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(dim), pivot])
    signs[signs == 0] = 1.0
    components = components * signs[:, None]

    total = eigvals.sum()
    if total <= 0.0:
        return PcaResult(
            mean=mean,
            components=components,
            explained_variance_ratio=np.zeros(dim),
            intrinsic_dim=0,
            projected=np.empty((x.shape[0], 0)),
            degenerate=True,
        )

    ratio = eigvals / total
    cumulative = np.cumsum(ratio)
    # Tiny epsilon so threshold 1.0 is reachable despite rounding in the sum.
    reached = np.flatnonzero(cumulative >= var_threshold - 1e-12)
    intrinsic = int(reached[0]) + 1 if reached.size else dim
    n_proj = intrinsic if max_components is None else min(intrinsic, max_components)
    projected = centered @ components[:n_proj].T
    return PcaResult(
        mean=mean,
        components=components,
        explained_variance_ratio=ratio,
        intrinsic_dim=intrinsic,
        projected=projected,
    )


@dataclass(frozen=True)
class Histogram:
    """Equal-width binning of a scalar sample; counts always sum to len(input)."""

    bin_edges: np.ndarray
    counts: np.ndarray


def histogram(values: np.ndarray, bins: int = DEFAULT_HISTOGRAM_BINS) -> Histogram:
    """Equal-width histogram over [min, max] with the maximum in the last bin.

    A degenerate range (all values equal) collapses to a single bin of
    width 1 centered on the value, regardless of the requested count.
    """
    if bins < 1:
        raise AnalysisError(f"bin count must be positive, got {bins}")
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 1:
        raise AnalysisError("histogram needs at least one value")
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        return Histogram(
            bin_edges=np.array([lo - 0.5, lo + 0.5]),
            counts=np.array([v.size]),
        )
    counts, edges = np.histogram(v, bins=bins, range=(lo, hi))
    return Histogram(bin_edges=edges, counts=counts)


def aggregate_mean(values: np.ndarray, times: np.ndarray, time_weighted: bool = False) -> float:
    """Mean of a sampled series, optionally trapezoid-weighted by time.

    The time-weighted form uses weights [dt0/2, (dt0+dt1)/2, ...,
    dt_{N-2}/2], i.e. the trapezoidal rule normalized by the window
    span, which reduces to the plain mean for a constant series on any
    axis and to [1/2, 1, ..., 1, 1/2]*dt for uniform sampling.
    """
    v = np.asarray(values, dtype=float).ravel()
    t = np.asarray(times, dtype=float).ravel()
    if v.size < 1:
        raise AnalysisError("need at least one value")
    if v.size != t.size:
        raise AnalysisError(f"series length {v.size} != time axis length {t.size}")
    if not time_weighted:
        return float(v.mean())
    if v.size == 1:
        return float(v[0])
    dt = np.diff(t)
    weights = np.zeros_like(v)
    weights[:-1] += dt / 2
    weights[1:] += dt / 2
    return float((weights * v).sum() / weights.sum())
