"""Exception types raised across the package."""


class SqueezedMechError(Exception):
    """Base class for all package errors."""


class InvalidTruncationError(SqueezedMechError, ValueError):
    pass


class SpecMismatchError(SqueezedMechError, ValueError):
    """Operators or states built on different truncations were combined."""


class InvalidStateError(SqueezedMechError, ValueError):
    pass


class InvalidParameterError(SqueezedMechError, ValueError):
    pass


class CriticalCouplingError(InvalidParameterError):
    """Parametric coupling at or beyond xi0 = (delta1 + delta2) / 2."""


class NotFoundError(SqueezedMechError):
    pass


class ModelInvalidError(SqueezedMechError, ValueError):
    pass


class SolverError(SqueezedMechError, RuntimeError):
    """Base class for numerical failures in the Lindblad engine."""


class StiffnessError(SolverError):
    pass


class AccuracyError(SolverError):
    pass


class NonUniqueSteadyStateError(SolverError):
    pass


class TruncationTooSmallError(SolverError):
    pass


class UndefinedCorrelationError(SolverError, ValueError):
    pass


class ConfigError(SqueezedMechError, ValueError):
    """Invalid experiment configuration; ``path`` names the offending key."""

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
