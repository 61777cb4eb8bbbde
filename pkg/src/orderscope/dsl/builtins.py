"""Catalog of the functions callable from measure expressions.

This module is purely declarative: names, kinds, signatures, and help
text. The evaluator binds the implementations. ``at`` is not listed
here because it is a context binding of per-step evaluation, not a
library function.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class MeasureKind(Enum):
    PER_STEP = "per_step"
    AGGREGATE = "aggregate"


class ValueType(Enum):
    SCALAR = "scalar"
    VECTOR = "vector"
    SERIES = "series"

    def __str__(self) -> str:
        return self.value


_BOTH = (MeasureKind.PER_STEP, MeasureKind.AGGREGATE)
_STEP = (MeasureKind.PER_STEP,)
_AGG = (MeasureKind.AGGREGATE,)

_S = ValueType.SCALAR
_V = ValueType.VECTOR
_T = ValueType.SERIES


@dataclass(frozen=True)
class Builtin:
    """Signature of one callable: fixed parameter list plus optional
    trailing defaults (min_arity < len(params) means later parameters
    may be omitted)."""

    name: str
    kinds: tuple[MeasureKind, ...]
    params: tuple[ValueType, ...]
    result: ValueType
    doc: str
    min_arity: int = -1

    def __post_init__(self):
        if self.min_arity < 0:
            object.__setattr__(self, "min_arity", len(self.params))

    @property
    def max_arity(self) -> int:
        return len(self.params)

    def arity_text(self) -> str:
        if self.min_arity == self.max_arity:
            return str(self.max_arity)
        return f"{self.min_arity}..{self.max_arity}"


BUILTINS: tuple[Builtin, ...] = (
    Builtin("norm", _STEP, (_V,), _S, "Euclidean length of a vector."),
    Builtin("dot", _STEP, (_V, _V), _S, "Dot product of two vectors."),
    Builtin("dist", _STEP, (_V, _V), _S, "Euclidean distance between two vectors."),
    Builtin(
        "particle",
        _STEP,
        (_V, _S),
        _V,
        "Three-component slice of a feature vector: particle(v, p) is the "
        "orientation of particle p (0-based).",
    ),
    Builtin("vmean", _STEP, (_V,), _S, "Mean of a vector's components."),
    Builtin("vmin", _STEP, (_V,), _S, "Smallest component of a vector."),
    Builtin("vmax", _STEP, (_V,), _S, "Largest component of a vector."),
    Builtin(
        "vstd", _STEP, (_V,), _S, "Population standard deviation of a vector's components."
    ),
    Builtin(
        "recurrence",
        _STEP,
        (_S,),
        _S,
        "Recurrence distance at the current step: smallest Euclidean "
        "distance to any windowed feature vector at least w steps away. "
        "recurrence(w) sets the exclusion width; recurrence() uses the "
        "session default.",
        min_arity=0,
    ),
    Builtin("abs", _BOTH, (_S,), _S, "Absolute value."),
    Builtin("sqrt", _BOTH, (_S,), _S, "Square root; negative input is an error."),
    Builtin("sin", _BOTH, (_S,), _S, "Sine (radians)."),
    Builtin("cos", _BOTH, (_S,), _S, "Cosine (radians)."),
    Builtin("exp", _BOTH, (_S,), _S, "Exponential."),
    Builtin("log", _BOTH, (_S,), _S, "Natural logarithm; input must be positive."),
    Builtin("mean", _AGG, (_T,), _S, "Arithmetic mean of a series."),
    Builtin(
        "twmean",
        _AGG,
        (_T,),
        _S,
        "Time-weighted mean of a series using trapezoidal weights over "
        "the window's time axis.",
    ),
    Builtin("median", _AGG, (_T,), _S, "Median of a series."),
    Builtin("std", _AGG, (_T,), _S, "Population standard deviation of a series."),
    Builtin("min", _AGG, (_T,), _S, "Smallest value of a series."),
    Builtin("max", _AGG, (_T,), _S, "Largest value of a series."),
    Builtin(
        "quantile",
        _AGG,
        (_T, _S),
        _S,
        "Linear-interpolated quantile of a series; q must lie in [0, 1].",
    ),
    Builtin("first", _AGG, (_T,), _S, "First value of a series."),
    Builtin("last", _AGG, (_T,), _S, "Last value of a series."),
    Builtin("len", _AGG, (_T,), _S, "Number of samples in a series."),
)

BUILTIN_TABLE: dict[str, Builtin] = {b.name: b for b in BUILTINS}

# Context bindings available to expressions, by kind.
BINDINGS: dict[MeasureKind, dict[str, ValueType]] = {
    MeasureKind.PER_STEP: {
        "X": _V,
        "t": _S,
        "i": _S,
        "N": _S,
        "d": _S,
        "beta": _S,
    },
    MeasureKind.AGGREGATE: {
        "S": _T,
        "T_axis": _T,
    },
}

BINDING_DOCS: dict[str, str] = {
    "X": "Feature vector of the current time step (all particle orientations).",
    "t": "Time stamp of the current step.",
    "i": "0-based index of the current step within the window.",
    "N": "Number of steps in the window.",
    "d": "The run's first parameter (lattice distance).",
    "beta": "The run's second parameter.",
    "at": "at(j): feature vector at window index j (0 <= j < N).",
    "S": "Series of per-step measure values within the window.",
    "T_axis": "Time stamps matching S.",
}
