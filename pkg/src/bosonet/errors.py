"""Exception hierarchy.

The CLI maps these onto exit codes: parse errors -> 1, validation errors -> 2,
numerical failures -> 3.
"""


class BosonetError(Exception):
    pass


class NetworkParseError(BosonetError):
    """Malformed document (JSON syntax). Carries 1-based line/column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(BosonetError, ValueError):
    """Well-formed input that violates a model invariant."""

    def __init__(self, message, field=None):
        self.field = field
        prefix = f"{field}: " if field else ""
        super().__init__(f"{prefix}{message}")


class DampingModelError(ValidationError):
    pass


class DegenerateStateError(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class NumericalError(BosonetError, ArithmeticError):
    pass


class DefectiveMatrixError(NumericalError):
    def __init__(self, message, residual=float("nan"), condition=float("nan")):
        self.residual = residual
        self.condition = condition
        super().__init__(f"{message} (residual={residual:.3e}, cond(D)={condition:.3e})")


class StepSizeError(NumericalError):
    pass


class TruncationError(NumericalError):
    def __init__(self, message, weight):
        self.weight = weight
        super().__init__(f"{message} (discarded weight {weight:.3e})")
