from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from orderscope import (
    GeneratorMode,
    GeneratorSpec,
    ParameterPoint,
    Run,
    generate_run,
)


def make_run(
    run_id: str,
    times: np.ndarray,
    features: np.ndarray,
    d: float = 1.0,
    beta: float = 0.0,
) -> Run:
    """Assemble a Run directly from arrays, bypassing the CSV loader."""
    features = np.asarray(features, dtype=float)
    return Run(
        id=run_id,
        params=ParameterPoint(d=float(d), beta=float(beta)),
        times=np.asarray(times, dtype=float),
        features=features,
    )


def deterministic_features(steps: int, k: int) -> np.ndarray:
    """Unit-norm triples from closed-form angles; no RNG involved."""
    out = np.empty((steps, 3 * k))
    for p in range(k):
        theta = 0.1 * (p + 1) * np.arange(steps)
        phi = 0.3 * p
        out[:, 3 * p] = np.cos(theta)
        out[:, 3 * p + 1] = np.sin(theta) * math.cos(phi)
        out[:, 3 * p + 2] = np.sin(theta) * math.sin(phi)
    return out


@pytest.fixture
def periodic_run() -> Run:
    spec = GeneratorSpec(
        mode=GeneratorMode.PERIODIC,
        k=7,
        steps=200,
        period_steps=50,
        seed=101,
        params=ParameterPoint(d=1.5, beta=-2.0),
        run_id="periodic",
    )
    return generate_run(spec)


@pytest.fixture
def noisy_run() -> Run:
    spec = GeneratorSpec(
        mode=GeneratorMode.NOISY,
        k=7,
        steps=200,
        noise_amplitude=0.2,
        seed=202,
        params=ParameterPoint(d=2.5, beta=1.0),
        run_id="noisy",
    )
    return generate_run(spec)


@pytest.fixture
def small_run() -> Run:
    times = np.arange(64, dtype=float) + 0.25 * np.sin(np.arange(64))
    return make_run("small", times, deterministic_features(64, 7), d=2.3, beta=-2.7)
