"""Exception hierarchy shared across the engine.

The split mirrors how failures surface to users: data problems carry the
run id and row that triggered them, measure problems carry a source
position, and kernel misuse (bad window, bad bin count) carries a plain
message.
"""

from __future__ import annotations


class OrderscopeError(Exception):
    """Base class for all engine errors."""

    @property
    def message(self) -> str:
        """The bare message, without the location suffix ``__str__`` adds."""
        return str(self.args[0]) if self.args else ""


class DataValidationError(OrderscopeError):
    """A run file or manifest failed validation.

    ``run_id`` and ``row`` (0-based data row, header excluded) identify the
    offending record where applicable; either may be None for file-level
    problems such as a missing CSV.
    """

    def __init__(self, message: str, run_id: str | None = None, row: int | None = None):
        super().__init__(message)
        self.run_id = run_id
        self.row = row

    def __str__(self) -> str:
        where = []
        if self.run_id is not None:
            where.append(f"run {self.run_id!r}")
        if self.row is not None:
            where.append(f"row {self.row}")
        base = super().__str__()
        return f"{base} ({', '.join(where)})" if where else base


class EmptyWindowError(OrderscopeError):
    """A time window selected fewer samples than the operation needs."""


class AnalysisError(OrderscopeError):
    """A numerical kernel was called outside its domain."""


class MeasureError(OrderscopeError):
    """Base for measure-language errors."""


class MeasureSyntaxError(MeasureError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.line = line
        self.col = col

    def __str__(self) -> str:
        return f"{super().__str__()} (line {self.line}, col {self.col})"


class MeasureTypeError(MeasureError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.line = line
        self.col = col

    def __str__(self) -> str:
        return f"{super().__str__()} (line {self.line}, col {self.col})"


class MeasureRuntimeError(MeasureError):
    """Raised while evaluating a compiled measure.

    ``time_index`` is the 0-based window index being evaluated when the
    failure occurred, if the failure happened inside a per-step loop.
    """

    def __init__(self, message: str, time_index: int | None = None):
        super().__init__(message)
        self.time_index = time_index

    def __str__(self) -> str:
        if self.time_index is not None:
            return f"{super().__str__()} (at window index {self.time_index})"
        return super().__str__()
