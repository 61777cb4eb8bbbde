"""Ensemble data model: runs, windows, loading and validated access.

An ensemble is a set of simulation runs over a 2-D parameter grid. Each
run is a time axis plus a T x D feature matrix, where D = 3k stacks the
k per-particle orientation unit vectors. On disk an ensemble is one JSON
manifest plus one CSV file per run (see `load_ensemble`).

Everything here is immutable after load; windowed access returns array
views, never copies with interpolation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataValidationError, EmptyWindowError

# Orientation norms farther than this from 1 are corrupt data; anything
# inside the band is absorbed by renormalization.
NORM_TOLERANCE = 1e-3
# Norms already this close to 1 are left untouched so that loading is a
# byte-level no-op for pre-normalized files.
NORM_EXACT = 1e-9

AXIS_OFFSETS = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class ParameterPoint:
    """One point of the simulation parameter grid."""

    d: float
    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.d) and np.isfinite(self.beta)):
            raise DataValidationError("parameter values must be finite")


@dataclass(frozen=True)
class Window:
    """Closed time interval [t_start, t_end] in run time units."""

    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_start <= self.t_end:
            raise EmptyWindowError(
                f"window start {self.t_start} exceeds end {self.t_end}"
            )

    @classmethod
    def full(cls) -> "Window":
        return cls(-np.inf, np.inf)


@dataclass(frozen=True)
class Run:
    """One simulation run: a time axis and its feature matrix.

    ``times`` is strictly increasing with at least 2 samples; ``features``
    has shape (len(times), 3k) and every 3-component orientation block has
    unit norm within 1e-9.
    """

    id: str
    params: ParameterPoint
    times: np.ndarray
    features: np.ndarray

    @property
    def k(self) -> int:
        return self.features.shape[1] // 3

    @property
    def steps(self) -> int:
        return self.features.shape[0]

    @property
    def t_min(self) -> float:
        return float(self.times[0])

    @property
    def t_max(self) -> float:
        return float(self.times[-1])


@dataclass(frozen=True)
class Ensemble:
    id: str
    runs: tuple[Run, ...]
    k: int
    by_id: dict[str, Run] = field(init=False, repr=False)

    def __post_init__(self):
        ids = [r.id for r in self.runs]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise DataValidationError(f"duplicate run ids: {dup}")
        for r in self.runs:
            if r.features.shape[1] != 3 * self.k:
                raise DataValidationError(
                    f"feature dimension {r.features.shape[1]} != 3k = {3 * self.k}",
                    run_id=r.id,
                )
        object.__setattr__(self, "by_id", {r.id: r for r in self.runs})

    @property
    def dim(self) -> int:
        return 3 * self.k

    def run(self, run_id: str) -> Run:
        try:
            return self.by_id[run_id]
        except KeyError:
            raise KeyError(f"unknown run id {run_id!r}") from None


def expected_header(k: int) -> str:
    cols = ["t"] + [f"p{p}{a}" for p in range(k) for a in "xyz"]
    return ",".join(cols)


def _validate_run_arrays(run_id: str, times: np.ndarray, features: np.ndarray, k: int
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Check a parsed run and renormalize orientation blocks in place of a copy."""
    steps = times.shape[0]
    if steps < 2:
        raise DataValidationError(f"run has {steps} samples, need at least 2", run_id=run_id)

    bad = np.flatnonzero(~np.isfinite(times))
    if bad.size:
        raise DataValidationError("non-finite time value", run_id=run_id, row=int(bad[0]))
    bad = np.flatnonzero(~np.isfinite(features).all(axis=1))
    if bad.size:
        raise DataValidationError("non-finite feature value", run_id=run_id, row=int(bad[0]))

    if not np.all(np.diff(times) > 0):
        row = int(np.flatnonzero(np.diff(times) <= 0)[0]) + 1
        raise DataValidationError("times not strictly increasing", run_id=run_id, row=row)

    blocks = features.reshape(steps, k, 3)
    norms = np.sqrt((blocks**2).sum(axis=2))
    off = np.abs(norms - 1.0)
    if np.any(off > NORM_TOLERANCE):
        row, particle = np.argwhere(off > NORM_TOLERANCE)[0]
        raise DataValidationError(
            f"orientation norm {norms[row, particle]:.6g} of particle {particle} "
            f"outside [{1 - NORM_TOLERANCE}, {1 + NORM_TOLERANCE}]",
            run_id=run_id,
            row=int(row),
        )
    # Division by 1.0 is exact, so already-normalized blocks keep their bits.
    factor = np.where(off > NORM_EXACT, norms, 1.0)
    features = (blocks / factor[:, :, None]).reshape(steps, 3 * k)
    features.setflags(write=False)
    times = times.copy()
    times.setflags(write=False)
    return times, features


def _read_run_csv(path: Path, run_id: str, k: int) -> tuple[np.ndarray, np.ndarray]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataValidationError(f"cannot read run file {path}: {exc}", run_id=run_id)

    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataValidationError(f"run file {path} is empty", run_id=run_id)
    header = lines[0].strip()
    want = expected_header(k)
    if header != want:
        if header.count(",") != want.count(","):
            raise DataValidationError(
                f"column count {header.count(',') + 1} != {3 * k + 1} (k={k})",
                run_id=run_id,
            )
        raise DataValidationError(
            f"unexpected header {header!r}, expected {want!r}", run_id=run_id
        )

    ncols = 3 * k + 1
    data = np.empty((len(lines) - 1, ncols))
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != ncols:
            raise DataValidationError(
                f"column count {len(parts)} != {ncols}", run_id=run_id, row=i
            )
        try:
            data[i] = [float(p) for p in parts]
        except ValueError:
            raise DataValidationError(
                f"unparseable numeric value in {line!r}", run_id=run_id, row=i
            ) from None
    return data[:, 0], data[:, 1:]


def load_ensemble(manifest_path: str | Path, ensemble_id: str | None = None) -> Ensemble:
    """Load and validate an ensemble from its JSON manifest.

    The manifest has the shape::

        { "k": 7, "runs": [ { "id": "...", "d": 2.3, "beta": -2.7,
                              "file": "relative/path.csv" }, ... ] }

    Run CSV paths are resolved relative to the manifest. Each run is
    validated (strictly increasing times, finite values, orientation norms
    within 1e-3 of 1) and orientation blocks are renormalized to unit
    length. Loading is deterministic: the same files always produce a
    bit-identical ensemble.

    Raises
    ------
    DataValidationError
        Naming the run id and 0-based data row wherever one applies.
    """
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / "manifest.json"
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataValidationError(f"cannot read manifest {manifest_path}: {exc}")
    except json.JSONDecodeError as exc:
        raise DataValidationError(f"manifest {manifest_path} is not valid JSON: {exc}")

    return load_ensemble_from_dict(
        manifest,
        base_dir=manifest_path.parent,
        ensemble_id=ensemble_id or manifest_path.parent.name or "ensemble",
    )


def load_ensemble_from_dict(
    manifest: dict, base_dir: str | Path, ensemble_id: str = "ensemble"
) -> Ensemble:
    """Load an ensemble from already-parsed manifest content; run file
    paths are resolved against *base_dir*. Validation is identical to
    :func:`load_ensemble`."""
    base_dir = Path(base_dir)
    try:
        k = int(manifest["k"])
        entries = manifest["runs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataValidationError(f"manifest missing required field: {exc}")
    if k < 1:
        raise DataValidationError(f"particle count k={k} must be positive")

    runs = []
    for entry in entries:
        try:
            run_id = str(entry["id"])
            params = ParameterPoint(d=float(entry["d"]), beta=float(entry["beta"]))
            rel = entry["file"]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataValidationError(f"malformed manifest run entry {entry!r}: {exc}")
        times, features = _read_run_csv(base_dir / rel, run_id, k)
        times, features = _validate_run_arrays(run_id, times, features, k)
        runs.append(Run(id=run_id, params=params, times=times, features=features))

    return Ensemble(id=ensemble_id, runs=tuple(runs), k=k)


def slice_run(run: Run, window: Window) -> Run:
    """Restrict a run to samples with t_start <= t <= t_end (both inclusive).

    Returns a view-backed Run; sample order and values are untouched and
    nothing is interpolated. Raises EmptyWindowError when fewer than 2
    samples fall inside the window.
    """
    lo = int(np.searchsorted(run.times, window.t_start, side="left"))
    hi = int(np.searchsorted(run.times, window.t_end, side="right"))
    if hi - lo < 2:
        raise EmptyWindowError(
            f"window [{window.t_start}, {window.t_end}] selects {hi - lo} samples "
            f"of run {run.id!r}, need at least 2"
        )
    if lo == 0 and hi == run.steps:
        return run
    return Run(
        id=run.id,
        params=run.params,
        times=run.times[lo:hi],
        features=run.features[lo:hi],
    )


def component_series(run: Run, particle: int, axis: str) -> tuple[np.ndarray, np.ndarray]:
    """Times and one orientation component of one particle.

    ``axis`` is "x", "y" or "z"; the value series is column
    3*particle + axis offset of the feature matrix.
    """
    if axis not in AXIS_OFFSETS:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    if not 0 <= particle < run.k:
        raise IndexError(f"particle index {particle} out of range for k={run.k}")
    return run.times, run.features[:, 3 * particle + AXIS_OFFSETS[axis]]
