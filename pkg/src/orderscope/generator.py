"""Synthetic ensembles with known ground-truth dynamics.

Each mode produces a signature the analysis views must distinguish:

* ``periodic``: every particle orientation rotates about a fixed
  per-particle axis; the phase depends only on ``step mod P``, so the
  trajectory returns to its exact bit pattern every P steps.
* ``quasi_periodic``: like periodic but with pairwise incommensurate
  per-particle rates (square roots of primes), so no exact return.
* ``noisy``: a random tangential walk on the unit sphere, amplitude
  sigma per step, renormalized after every step.
* ``switch``: periodic before ``switch_time``, noisy after, producing a
  level shift in recurrence-style measures.

All randomness comes from numpy's default PCG64 generator seeded per
spec, so identical specs yield bit-identical runs and CSV files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .ensemble import ParameterPoint, Run, expected_header
from .errors import DataValidationError


class GeneratorMode(Enum):
    PERIODIC = "periodic"
    QUASI_PERIODIC = "quasi_periodic"
    NOISY = "noisy"
    SWITCH = "switch"


_PERIODIC_MODES = (GeneratorMode.PERIODIC, GeneratorMode.QUASI_PERIODIC, GeneratorMode.SWITCH)

# Pairwise incommensurate rate multipliers for the quasi-periodic mode.
_PRIMES = (2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0)


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for one synthetic run."""

    mode: GeneratorMode
    k: int = 7
    steps: int = 500
    dt: float | tuple[float, ...] = 1.0
    period_steps: int = 50
    noise_amplitude: float = 0.1
    switch_time: float | None = None
    seed: int = 0
    params: ParameterPoint = ParameterPoint(1.0, 0.0)
    run_id: str | None = None

    def __post_init__(self):
        if self.k < 1:
            raise DataValidationError(f"particle count k={self.k} must be positive")
        if self.steps < 2:
            raise DataValidationError(f"steps={self.steps}, need at least 2")
        if isinstance(self.dt, tuple):
            if len(self.dt) != self.steps - 1:
                raise DataValidationError(
                    f"dt schedule has {len(self.dt)} entries, need steps-1 = {self.steps - 1}"
                )
            if any(not (step > 0 and math.isfinite(step)) for step in self.dt):
                raise DataValidationError("dt schedule entries must be positive and finite")
        elif not (self.dt > 0 and math.isfinite(self.dt)):
            raise DataValidationError(f"dt={self.dt} must be positive and finite")
        if self.mode in _PERIODIC_MODES and self.period_steps < 2:
            raise DataValidationError(
                f"period_steps={self.period_steps}, periodic modes need at least 2"
            )
        if self.noise_amplitude < 0:
            raise DataValidationError(f"noise amplitude {self.noise_amplitude} must be >= 0")
        if self.mode is GeneratorMode.SWITCH:
            if self.switch_time is None or not math.isfinite(self.switch_time):
                raise DataValidationError("switch mode needs a finite switch_time")

    def times(self) -> np.ndarray:
        if isinstance(self.dt, tuple):
            return np.concatenate([[0.0], np.cumsum(np.asarray(self.dt, dtype=np.float64))])
        return np.arange(self.steps, dtype=np.float64) * self.dt


def _random_unit_vectors(rng: np.random.Generator, count: int) -> np.ndarray:
    vectors = rng.normal(size=(count, 3))
    return vectors / np.linalg.norm(vectors, axis=1, keepdims=True)


def _rotate(orientation: np.ndarray, axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation of a unit vector about a unit axis."""
    cos_a = math.cos(angle)
    sin_a = math.sin(angle)
    return (
        orientation * cos_a
        + np.cross(axis, orientation) * sin_a
        + axis * float(axis @ orientation) * (1.0 - cos_a)
    )


def _phase_features(
    initial: np.ndarray, axes: np.ndarray, phases: np.ndarray
) -> np.ndarray:
    """Features for rotational modes: phases has shape (steps, k)."""
    steps, k = phases.shape
    features = np.empty((steps, 3 * k))
    for i in range(steps):
        for p in range(k):
            features[i, 3 * p : 3 * p + 3] = _rotate(initial[p], axes[p], phases[i, p])
    return features


def _noisy_walk(
    rng: np.random.Generator, start: np.ndarray, steps: int, sigma: float
) -> np.ndarray:
    """Tangential random walk on the unit sphere, one row per step.

    ``start`` (k x 3) is the orientation at the first emitted step.
    """
    k = start.shape[0]
    features = np.empty((steps, 3 * k))
    current = start.copy()
    features[0] = current.reshape(-1)
    for i in range(1, steps):
        gauss = rng.normal(size=(k, 3))
        radial = (gauss * current).sum(axis=1, keepdims=True)
        tangential = gauss - radial * current
        current = current + sigma * tangential
        current = current / np.linalg.norm(current, axis=1, keepdims=True)
        features[i] = current.reshape(-1)
    return features


def generate_run(spec: GeneratorSpec) -> Run:
    """Generate one run; deterministic given the spec (seed included)."""
    rng = np.random.default_rng(spec.seed)
    axes = _random_unit_vectors(rng, spec.k)
    initial = _random_unit_vectors(rng, spec.k)
    times = spec.times()
    steps = spec.steps
    indices = np.arange(steps)

    if spec.mode is GeneratorMode.PERIODIC:
        # Phase from (i mod P) alone: step i+P reproduces step i exactly.
        phase = 2.0 * math.pi * (indices % spec.period_steps) / spec.period_steps
        phases = np.repeat(phase[:, None], spec.k, axis=1)
        features = _phase_features(initial, axes, phases)
    elif spec.mode is GeneratorMode.QUASI_PERIODIC:
        rates = np.array(
            [
                math.sqrt(_PRIMES[p % len(_PRIMES)]) * (1.0 + p // len(_PRIMES))
                for p in range(spec.k)
            ]
        )
        base = 2.0 * math.pi / spec.period_steps
        phases = base * indices[:, None] * rates[None, :]
        features = _phase_features(initial, axes, phases)
    elif spec.mode is GeneratorMode.NOISY:
        features = _noisy_walk(rng, initial, steps, spec.noise_amplitude)
    else:  # SWITCH
        before = int(np.searchsorted(times, spec.switch_time, side="left"))
        before = max(1, min(before, steps))
        phase = 2.0 * math.pi * (indices[:before] % spec.period_steps) / spec.period_steps
        phases = np.repeat(phase[:, None], spec.k, axis=1)
        head = _phase_features(initial, axes, phases)
        if before < steps:
            last = head[-1].reshape(spec.k, 3)
            tail = _noisy_walk(rng, last, steps - before + 1, spec.noise_amplitude)
            features = np.concatenate([head, tail[1:]], axis=0)
        else:
            features = head

    times.setflags(write=False)
    features.setflags(write=False)
    run_id = spec.run_id or f"{spec.mode.value}-s{spec.seed}"
    return Run(id=run_id, params=spec.params, times=times, features=features)


def _format_float(value: float) -> str:
    return repr(float(value))


def run_to_csv(run: Run) -> str:
    """Serialize one run in the on-disk CSV format (shortest exact
    decimal per value, so write -> load -> write is byte stable)."""
    lines = [expected_header(run.k)]
    for i in range(run.steps):
        row = [_format_float(run.times[i])]
        row.extend(_format_float(v) for v in run.features[i])
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def default_mode_rule(
    point: ParameterPoint,
    *,
    periodic_threshold: float = 2.0,
    period_steps: int = 50,
    noise_base: float = 0.05,
    noise_scale: float = 0.05,
) -> GeneratorSpec:
    """The stock parameter-to-dynamics mapping: small lattice distances
    lock into periodic motion, larger ones go noisy with noise growing
    in |beta|."""
    if point.d < periodic_threshold:
        return GeneratorSpec(
            mode=GeneratorMode.PERIODIC, period_steps=period_steps, params=point
        )
    sigma = noise_base + noise_scale * abs(point.beta)
    return GeneratorSpec(
        mode=GeneratorMode.NOISY, noise_amplitude=sigma, params=point
    )


@dataclass(frozen=True)
class EnsembleSpec:
    """Recipe for a gridded ensemble (the CLI `gen` input)."""

    d_values: tuple[float, ...]
    beta_values: tuple[float, ...]
    k: int = 7
    steps: int = 500
    dt: float = 1.0
    seed: int = 0
    mode: GeneratorMode | None = None
    period_steps: int = 50
    noise_amplitude: float = 0.1
    noise_base: float = 0.05
    noise_scale: float = 0.05
    switch_time: float | None = None
    periodic_threshold: float = 2.0

    def __post_init__(self):
        if not self.d_values or not self.beta_values:
            raise DataValidationError("d_values and beta_values must be nonempty")
        for name, values in (("d_values", self.d_values), ("beta_values", self.beta_values)):
            arr = np.asarray(values, dtype=np.float64)
            if not np.isfinite(arr).all():
                raise DataValidationError(f"{name} must be finite")
            if len(np.unique(arr)) != len(arr):
                raise DataValidationError(f"{name} contains duplicates")


def _spec_for_point(ens: EnsembleSpec, point: ParameterPoint, seed: int) -> GeneratorSpec:
    if ens.mode is None:
        spec = default_mode_rule(
            point,
            periodic_threshold=ens.periodic_threshold,
            period_steps=ens.period_steps,
            noise_base=ens.noise_base,
            noise_scale=ens.noise_scale,
        )
    else:
        spec = GeneratorSpec(
            mode=ens.mode,
            period_steps=ens.period_steps,
            noise_amplitude=ens.noise_amplitude,
            switch_time=ens.switch_time,
            params=point,
        )
    return replace(spec, k=ens.k, steps=ens.steps, dt=ens.dt, seed=seed)


def generate_ensemble(ens: EnsembleSpec, out_dir: str | Path) -> Path:
    """Write a full ensemble (manifest + one CSV per grid point) under
    *out_dir* and return the manifest path.

    Run ids are ``d{d}_b{beta}``; the per-run seed is derived as
    ``seed * 1000003 + index`` with index running row-major over
    (d, beta), so any sub-grid regenerates identically.
    """
    out_dir = Path(out_dir)
    runs_dir = out_dir / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    index = 0
    for d in ens.d_values:
        for beta in ens.beta_values:
            point = ParameterPoint(float(d), float(beta))
            run_id = f"d{d:g}_b{beta:g}"
            spec = replace(
                _spec_for_point(ens, point, ens.seed * 1_000_003 + index),
                run_id=run_id,
            )
            run = generate_run(spec)
            rel = f"runs/{run_id}.csv"
            (out_dir / rel).write_text(run_to_csv(run), encoding="utf-8")
            entries.append(
                {"id": run_id, "d": float(d), "beta": float(beta), "file": rel}
            )
            index += 1

    manifest = {"k": ens.k, "runs": entries}
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest_path


def load_generator_spec(path: str | Path) -> EnsembleSpec:
    """Read an ensemble recipe from JSON (the CLI `gen --spec` file).

    Required keys: ``d_values``, ``beta_values``. Optional keys map to
    :class:`EnsembleSpec` fields; ``mode`` is one of the generator mode
    names or null for the default rule.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataValidationError(f"cannot read generator spec {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise DataValidationError(f"generator spec {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise DataValidationError("generator spec must be a JSON object")

    known = {
        "d_values", "beta_values", "k", "steps", "dt", "seed", "mode",
        "period_steps", "noise_amplitude", "noise_base", "noise_scale",
        "switch_time", "periodic_threshold",
    }
    unknown = sorted(set(raw) - known)
    if unknown:
        raise DataValidationError(f"unknown generator spec keys: {unknown}")
    try:
        d_values = tuple(float(v) for v in raw["d_values"])
        beta_values = tuple(float(v) for v in raw["beta_values"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataValidationError(f"generator spec needs numeric d_values/beta_values: {exc}")

    mode = raw.get("mode")
    if mode is not None:
        try:
            mode = GeneratorMode(mode)
        except ValueError:
            names = ", ".join(m.value for m in GeneratorMode)
            raise DataValidationError(f"unknown mode {mode!r}, expected one of: {names}")

    kwargs = {}
    for key in ("k", "steps", "period_steps", "seed"):
        if key in raw:
            kwargs[key] = int(raw[key])
    for key in ("dt", "noise_amplitude", "noise_base", "noise_scale", "periodic_threshold"):
        if key in raw:
            kwargs[key] = float(raw[key])
    if raw.get("switch_time") is not None:
        kwargs["switch_time"] = float(raw["switch_time"])

    try:
        return EnsembleSpec(d_values=d_values, beta_values=beta_values, mode=mode, **kwargs)
    except (TypeError, ValueError) as exc:
        raise DataValidationError(f"invalid generator spec: {exc}")
