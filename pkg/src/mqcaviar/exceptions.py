"""Exception types raised across the package."""


class MQCaviarError(Exception):
    """Base class for all package errors."""


class ValidationError(MQCaviarError, ValueError):
    """Input violates a documented precondition."""


class ShapeError(ValidationError):
    """Array dimensions disagree."""


class DomainError(ValidationError):
    """A value lies outside the domain of an operation."""


class ParseError(ValidationError):
    """Malformed input file. Carries the offending file and 1-based line."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class AlignmentError(MQCaviarError):
    """Series share no common dates."""


class DegenerateDataError(MQCaviarError):
    """Statistic undefined for the data, e.g. zero variance."""


class NumericalError(MQCaviarError):
    """Singular or rank-deficient linear algebra."""


class ExplosivePathError(MQCaviarError):
    """Quantile recursion exceeded the divergence bound at row ``t`` (1-based)."""

    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"quantile path diverged at t={t}")


class DGPValidityError(MQCaviarError):
    """Simulated quantile left the region where the location-scale DGP is defined."""


class OptimizerAbort(MQCaviarError):
    """Optimizer stopped on a non-finite objective; keeps the last good iterate."""

    def __init__(self, message, params=None, trace=None):
        self.params = params
        self.trace = trace
        super().__init__(message)


class CovarianceUnreliableError(MQCaviarError):
    """Too many bootstrap replicates failed to refit."""

    def __init__(self, message, estimate=None):
        self.estimate = estimate
        super().__init__(message)
