"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


class NonFiniteError(ValueError):
    """Input contains NaN or infinite entries."""


class ParameterError(ValueError):
    """A parameter is outside its documented range or combination."""


class ContractError(ValueError):
    """An input violates a documented precondition (e.g. non-orthonormal basis)."""


class NotApplicableError(ValueError):
    """The requested analysis does not apply to this object (e.g. no recorded seed)."""


class ConvergenceError(RuntimeError):
    """An iteration failed to converge within its sweep budget."""

    def __init__(self, message, sweeps=None, max_offdiag=None):
        super().__init__(message)
        self.sweeps = sweeps
        self.max_offdiag = max_offdiag


class SingularSketchError(RuntimeError):
    """The leading sketch block is numerically singular."""

    def __init__(self, message, cond_estimate=None):
        super().__init__(message)
        self.cond_estimate = cond_estimate


class ParseError(ValueError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message, lineno=None, path=None):
        if lineno is not None:
            message = f"{message} (line {lineno})"
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
        self.lineno = lineno
        self.path = path


class CapacityError(RuntimeError):
    """An operation would exceed the configured memory cap."""
