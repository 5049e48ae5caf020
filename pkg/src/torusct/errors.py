"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class TorusError(ValueError):
    exit_code = 1


class SchemaError(TorusError):
    """Malformed or schema-invalid input file."""

    exit_code = 2


class CoveringError(TorusError):
    """Some frequency in the box has no orthogonal direction in the working set."""

    exit_code = 3

    def __init__(self, message, uncovered=()):
        super().__init__(message)
        self.uncovered = list(uncovered)


class WeightError(TorusError):
    """A weight violates a property required by the requested operation."""

    exit_code = 4


class NumericError(TorusError):
    """Numerical precondition or hypothesis violated (Nyquist, regime, convergence)."""

    exit_code = 5
