"""Type checking and measure compilation.

A measure is compiled once: its source is parsed, the tree is checked
against the binding environment of its kind, and the result must be a
scalar. Compiled measures are immutable and safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import MeasureError, MeasureTypeError
from .builtins import BINDINGS, BUILTIN_TABLE, BUILTINS, Builtin, MeasureKind, ValueType
from .parser import BinOp, Call, Expr, Index, Let, Neg, Num, Var, parse


@dataclass(frozen=True)
class MeasureDefinition:
    """A named measure: display name, kind, and expression source."""

    name: str
    kind: MeasureKind
    source: str

    def __post_init__(self):
        if not self.name.strip():
            raise MeasureError("measure name must be nonempty")


@dataclass(frozen=True)
class CompiledMeasure:
    """A definition together with its type-checked expression tree.

    The top-level expression is guaranteed to be scalar-valued.
    """

    definition: MeasureDefinition
    ast: Expr

    @property
    def kind(self) -> MeasureKind:
        return self.definition.kind

    @property
    def name(self) -> str:
        return self.definition.name


def list_builtins() -> tuple[Builtin, ...]:
    """The callable functions of the measure language, with kinds,
    arities, and help text. Deterministic order."""
    return BUILTINS


def _err(node: Expr, message: str) -> MeasureTypeError:
    return MeasureTypeError(message, line=node.line, col=node.col)


def _check_call(node: Call, kind: MeasureKind, env: dict[str, ValueType]) -> ValueType:
    if node.name in env:
        raise _err(node, f"'{node.name}' is not a function")
    if kind is MeasureKind.PER_STEP and node.name == "at":
        if len(node.args) != 1:
            raise _err(node, f"'at' expects 1 argument, found {len(node.args)}")
        arg_type = _check(node.args[0], kind, env)
        if arg_type is not ValueType.SCALAR:
            raise _err(node.args[0], f"argument of 'at' must be scalar, found {arg_type}")
        return ValueType.VECTOR
    builtin = BUILTIN_TABLE.get(node.name)
    if builtin is None:
        raise _err(node, f"unknown function '{node.name}'")
    # Arguments are checked before the function's kind and arity so that
    # e.g. aggregate-context norm(X) reports the unbound X.
    arg_types = [_check(arg, kind, env) for arg in node.args]
    if kind not in builtin.kinds:
        raise _err(
            node,
            f"function '{node.name}' is not available in {kind.value} measures",
        )
    if not (builtin.min_arity <= len(node.args) <= builtin.max_arity):
        raise _err(
            node,
            f"function '{node.name}' expects {builtin.arity_text()} "
            f"argument(s), found {len(node.args)}",
        )
    for position, (arg, got, want) in enumerate(
        zip(node.args, arg_types, builtin.params), start=1
    ):
        if got is not want:
            raise _err(
                arg,
                f"argument {position} of '{node.name}' must be a {want}, found {got}",
            )
    return builtin.result


_ELEMENTWISE = ("+", "-", "*", "/")


def _check_binop(node: BinOp, kind: MeasureKind, env: dict[str, ValueType]) -> ValueType:
    left = _check(node.left, kind, env)
    right = _check(node.right, kind, env)
    if node.op == "^":
        if left is not ValueType.SCALAR:
            raise _err(node.left, f"base of '^' must be scalar, found {left}")
        if right is not ValueType.SCALAR:
            raise _err(node.right, f"exponent of '^' must be scalar, found {right}")
        return ValueType.SCALAR
    # +, -, *, / work elementwise; a scalar broadcasts against either side.
    if left is right:
        return left
    if left is ValueType.SCALAR:
        return right
    if right is ValueType.SCALAR:
        return left
    raise _err(node, f"cannot combine {left} and {right} with '{node.op}'")


def _check(node: Expr, kind: MeasureKind, env: dict[str, ValueType]) -> ValueType:
    if isinstance(node, Num):
        if not math.isfinite(node.value):
            raise _err(node, "number literal out of range")
        return ValueType.SCALAR
    if isinstance(node, Var):
        found = env.get(node.name)
        if found is None:
            raise _err(node, f"unbound identifier '{node.name}'")
        return found
    if isinstance(node, Call):
        return _check_call(node, kind, env)
    if isinstance(node, Index):
        base = env.get(node.name)
        if base is None:
            raise _err(node, f"unbound identifier '{node.name}'")
        if base is ValueType.SCALAR:
            raise _err(node, f"'{node.name}' is a scalar and cannot be indexed")
        index_type = _check(node.index, kind, env)
        if index_type is not ValueType.SCALAR:
            raise _err(node.index, f"index must be scalar, found {index_type}")
        return ValueType.SCALAR
    if isinstance(node, Neg):
        return _check(node.operand, kind, env)
    if isinstance(node, BinOp):
        return _check_binop(node, kind, env)
    if isinstance(node, Let):
        bound = _check(node.bound, kind, env)
        inner = dict(env)
        inner[node.name] = bound
        return _check(node.body, kind, inner)
    raise TypeError(f"unknown node {node!r}")


def typecheck(tree: Expr, kind: MeasureKind | str) -> ValueType:
    """Check *tree* under the bindings of *kind*; the result must be
    scalar. Raises :class:`MeasureTypeError` with the node position."""
    if isinstance(kind, str):
        kind = MeasureKind(kind)
    result = _check(tree, kind, dict(BINDINGS[kind]))
    if result is not ValueType.SCALAR:
        raise _err(tree, f"scalar required, found {result}")
    return result


def compile_measure(definition: MeasureDefinition) -> CompiledMeasure:
    """Parse and type check a measure definition."""
    tree = parse(definition.source)
    typecheck(tree, definition.kind)
    return CompiledMeasure(definition, tree)


def compile_source(name: str, kind: MeasureKind | str, source: str) -> CompiledMeasure:
    """Convenience wrapper building the definition from loose values."""
    if isinstance(kind, str):
        kind = MeasureKind(kind)
    return compile_measure(MeasureDefinition(name, kind, source))
