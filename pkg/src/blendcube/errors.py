"""Exception types shared across the engine."""

from __future__ import annotations


class BlendcubeError(Exception):
    """Base class for all engine errors."""


class SchemaError(BlendcubeError):
    """Malformed schema descriptor or structurally invalid constellation."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DataError(BlendcubeError):
    """Bad instance data (missing values, type errors, dangling keys)."""


class UnknownValueError(DataError):
    """A value was not found in the active domain of a parameter."""


class StrictnessError(DataError):
    """A finer value co-occurs with more than one coarser value."""

    def __init__(self, lower: str, upper: str, value, parents):
        self.lower = lower
        self.upper = upper
        self.value = value
        self.parents = sorted(str(p) for p in parents)
        super().__init__(
            f"value {value!r} of {lower} rolls up to several {upper} values: "
            f"{', '.join(self.parents)}"
        )


class ValidationError(BlendcubeError):
    """Raised at seal time; carries the full validation report."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"constellation invalid: {len(report.violations)} violation(s)")


class PredicateError(BlendcubeError):
    """Predicate parse or evaluation failure, with a column position when known."""

    def __init__(self, message: str, column: int | None = None):
        self.column = column
        if column is not None:
            message = f"{message} (column {column})"
        super().__init__(message)


class OperatorError(BlendcubeError):
    """A manipulation operator was applied outside its preconditions."""


class ConstraintViolation(OperatorError):
    """The blend predicate breaks the disjointness constraint."""

    def __init__(self, offending_values):
        self.offending_values = sorted(str(v) for v in offending_values)
        super().__init__(
            "blend predicate invalid: upper-set values also parent the lower set: "
            + ", ".join(self.offending_values)
        )


class CommandError(BlendcubeError):
    """CLI command parse or dispatch failure, with a column position when known."""

    def __init__(self, message: str, column: int | None = None):
        self.column = column
        if column is not None:
            message = f"{message} (column {column})"
        super().__init__(message)
