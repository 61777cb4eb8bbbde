"""Measure evaluation.

Per-step measures run once per windowed time step with the step's
bindings (X, t, i, N, d, beta, at); aggregate measures run once per
series (S, T_axis). Any NaN or infinity produced mid-expression is a
runtime error, as are division by zero and domain violations; failures
carry the time index where they occurred.
"""

from __future__ import annotations

import math

import numpy as np

from ..analysis import DEFAULT_EXCLUSION_WIDTH, aggregate_mean, recurrence_series
from ..errors import AnalysisError, MeasureError, MeasureRuntimeError
from ..ensemble import Run, Window, slice_run
from .builtins import MeasureKind
from .compile import CompiledMeasure
from .parser import BinOp, Call, Expr, Index, Let, Neg, Num, Var

_Value = "float | np.ndarray"


class _StepContext:
    """Shared state for one per-step evaluation pass."""

    __slots__ = ("times", "features", "n", "default_width", "index", "_recurrence")

    def __init__(self, times: np.ndarray, features: np.ndarray, default_width: int):
        self.times = times
        self.features = features
        self.n = features.shape[0]
        self.default_width = default_width
        self.index: int | None = None
        self._recurrence: dict[int, np.ndarray] = {}

    def recurrence(self, width: int) -> np.ndarray:
        cached = self._recurrence.get(width)
        if cached is None:
            try:
                cached = recurrence_series(self.features, width)
            except AnalysisError as exc:
                raise self.error(str(exc)) from exc
            self._recurrence[width] = cached
        return cached

    def error(self, message: str) -> MeasureRuntimeError:
        return MeasureRuntimeError(message, time_index=self.index)


class _AggContext:
    """Shared state for one aggregate evaluation."""

    __slots__ = ("times", "index")

    def __init__(self, times: np.ndarray):
        self.times = times
        self.index = None

    def error(self, message: str) -> MeasureRuntimeError:
        return MeasureRuntimeError(message)


def _pos(node: Expr) -> str:
    return f"{node.line}:{node.col}"


def _is_finite(value) -> bool:
    if isinstance(value, np.ndarray):
        return bool(np.isfinite(value).all())
    return math.isfinite(value)


def _require_index(ctx, node: Expr, value: float, length: int, what: str) -> int:
    if float(value) != int(value):
        raise ctx.error(f"{what} must be an integer, found {value!r} (at {_pos(node)})")
    j = int(value)
    if not 0 <= j < length:
        raise ctx.error(
            f"{what} out of range: {j} not in [0, {length}) (at {_pos(node)})"
        )
    return j


def _eval_call(node: Call, env: dict, ctx) -> "float | np.ndarray":
    name = node.name
    args = [_eval(a, env, ctx) for a in node.args]

    if name == "at":
        j = _require_index(ctx, node, args[0], ctx.n, "at() index")
        return ctx.features[j]
    if name == "recurrence":
        if args:
            width_value = args[0]
            if float(width_value) != int(width_value) or int(width_value) < 1:
                raise ctx.error(
                    f"recurrence width must be a positive integer, found "
                    f"{width_value!r} (at {_pos(node)})"
                )
            width = int(width_value)
        else:
            width = ctx.default_width
        return float(ctx.recurrence(width)[ctx.index])

    if name == "norm":
        return float(np.sqrt((args[0] ** 2).sum()))
    if name == "dot":
        return float((args[0] * args[1]).sum())
    if name == "dist":
        return float(np.sqrt(((args[0] - args[1]) ** 2).sum()))
    if name == "particle":
        vector = args[0]
        count = len(vector) // 3
        p = _require_index(ctx, node, args[1], count, "particle number")
        return vector[3 * p : 3 * p + 3]
    if name == "vmean":
        return float(args[0].mean())
    if name == "vmin":
        return float(args[0].min())
    if name == "vmax":
        return float(args[0].max())
    if name == "vstd":
        return float(args[0].std())

    if name == "abs":
        return abs(float(args[0]))
    if name == "sqrt":
        x = float(args[0])
        if x < 0.0:
            raise ctx.error(f"sqrt of negative value {x!r} (at {_pos(node)})")
        return math.sqrt(x)
    if name == "sin":
        return math.sin(float(args[0]))
    if name == "cos":
        return math.cos(float(args[0]))
    if name == "exp":
        try:
            return math.exp(float(args[0]))
        except OverflowError:
            raise ctx.error(f"exp overflow (at {_pos(node)})") from None
    if name == "log":
        x = float(args[0])
        if x <= 0.0:
            raise ctx.error(f"log of non-positive value {x!r} (at {_pos(node)})")
        return math.log(x)

    if name == "mean":
        return float(args[0].mean())
    if name == "twmean":
        series = args[0]
        if len(series) != len(ctx.times):
            raise ctx.error(
                f"twmean series length {len(series)} does not match the "
                f"time axis length {len(ctx.times)} (at {_pos(node)})"
            )
        return aggregate_mean(series, ctx.times, time_weighted=True)
    if name == "median":
        return float(np.median(args[0]))
    if name == "std":
        return float(args[0].std())
    if name == "min":
        return float(args[0].min())
    if name == "max":
        return float(args[0].max())
    if name == "quantile":
        q = float(args[1])
        if not 0.0 <= q <= 1.0:
            raise ctx.error(
                f"quantile argument outside [0, 1]: {q!r} (at {_pos(node)})"
            )
        return float(np.quantile(args[0], q))
    if name == "first":
        return float(args[0][0])
    if name == "last":
        return float(args[0][-1])
    if name == "len":
        return float(len(args[0]))

    raise ctx.error(f"unknown function '{name}' (at {_pos(node)})")


def _eval_binop(node: BinOp, env: dict, ctx) -> "float | np.ndarray":
    left = _eval(node.left, env, ctx)
    right = _eval(node.right, env, ctx)
    op = node.op
    if op == "^":
        try:
            return math.pow(float(left), float(right))
        except (ValueError, OverflowError) as exc:
            raise ctx.error(f"invalid power {left!r} ^ {right!r} (at {_pos(node)})") from exc
    if op == "/":
        divisor_zero = (
            bool(np.any(right == 0.0))
            if isinstance(right, np.ndarray)
            else right == 0.0
        )
        if divisor_zero:
            raise ctx.error(f"division by zero (at {_pos(node)})")
    with np.errstate(all="ignore"):
        if op == "+":
            result = left + right
        elif op == "-":
            result = left - right
        elif op == "*":
            result = left * right
        else:
            result = left / right
    if not _is_finite(result):
        raise ctx.error(f"non-finite result from '{op}' (at {_pos(node)})")
    return result


def _eval(node: Expr, env: dict, ctx) -> "float | np.ndarray":
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Call):
        result = _eval_call(node, env, ctx)
        if not _is_finite(result):
            raise ctx.error(f"non-finite result from '{node.name}' (at {_pos(node)})")
        return result
    if isinstance(node, Index):
        array = env[node.name]
        j = _require_index(ctx, node, _eval(node.index, env, ctx), len(array), "index")
        return float(array[j])
    if isinstance(node, Neg):
        return -_eval(node.operand, env, ctx)
    if isinstance(node, BinOp):
        return _eval_binop(node, env, ctx)
    if isinstance(node, Let):
        inner = dict(env)
        inner[node.name] = _eval(node.bound, env, ctx)
        return _eval(node.body, inner, ctx)
    raise TypeError(f"unknown node {node!r}")


def eval_per_step(
    measure: CompiledMeasure,
    run: Run,
    window: Window | None = None,
    *,
    default_width: int = DEFAULT_EXCLUSION_WIDTH,
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate a per-step measure over the windowed run.

    Returns ``(times, values)`` of equal length. Raises
    :class:`MeasureRuntimeError` carrying the failing time index, or
    :class:`EmptyWindowError` if the window holds fewer than 2 samples.
    """
    if measure.kind is not MeasureKind.PER_STEP:
        raise MeasureError(f"measure '{measure.name}' is not a per-step measure")
    windowed = slice_run(run, window) if window is not None else run
    times = windowed.times
    features = windowed.features
    ctx = _StepContext(times, features, default_width)
    n = ctx.n
    values = np.empty(n, dtype=np.float64)
    d = float(windowed.params.d)
    beta = float(windowed.params.beta)
    n_scalar = float(n)
    for i in range(n):
        ctx.index = i
        env = {
            "X": features[i],
            "t": float(times[i]),
            "i": float(i),
            "N": n_scalar,
            "d": d,
            "beta": beta,
        }
        values[i] = _eval(measure.ast, env, ctx)
    return times, values


def eval_aggregate(
    measure: CompiledMeasure, series: np.ndarray, t_axis: np.ndarray
) -> float:
    """Evaluate an aggregate measure on a scalar series and its time
    axis, returning one finite scalar."""
    if measure.kind is not MeasureKind.AGGREGATE:
        raise MeasureError(f"measure '{measure.name}' is not an aggregate measure")
    series = np.asarray(series, dtype=np.float64)
    t_axis = np.asarray(t_axis, dtype=np.float64)
    if series.size < 1:
        raise MeasureError("aggregate input series is empty")
    if series.shape != t_axis.shape:
        raise MeasureError(
            f"series length {series.size} does not match time axis length {t_axis.size}"
        )
    ctx = _AggContext(t_axis)
    env = {"S": series, "T_axis": t_axis}
    result = _eval(measure.ast, env, ctx)
    return float(result)
