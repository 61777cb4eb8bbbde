"""The measure expression language.

Measures are small arithmetic expressions over a fixed set of bindings
and builtins, compiled once (parse + type check) and then evaluated many
times: per-step measures map every time step of a windowed run to a
scalar, aggregate measures map a scalar series to one number per run.
"""

from .parser import Expr, parse, to_source
from .compile import (
    CompiledMeasure,
    MeasureDefinition,
    MeasureKind,
    compile_measure,
    compile_source,
    list_builtins,
    typecheck,
)
from .evaluate import eval_aggregate, eval_per_step

__all__ = [
    "Expr",
    "parse",
    "to_source",
    "MeasureKind",
    "MeasureDefinition",
    "CompiledMeasure",
    "compile_measure",
    "compile_source",
    "typecheck",
    "list_builtins",
    "eval_per_step",
    "eval_aggregate",
]
