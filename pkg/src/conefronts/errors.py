"""Exception hierarchy shared by all modules."""


class ConeFrontsError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameterError(ConeFrontsError, ValueError):
    pass


class DegenerateFrontError(ConeFrontsError):
    """Coincident markers, non-positive area, or too few markers."""


class InvalidRayError(ConeFrontsError):
    """Ray direction does not point into the body."""


class InadmissibleRayError(ConeFrontsError):
    """kappa * gamma exceeds 1 beyond tolerance."""


class ConvexityLossError(ConeFrontsError):
    pass


class OracleInconsistencyError(ConeFrontsError):
    """ODE shooting does not close: the supplied velocity is wrong."""


class RidgeProximityError(ConeFrontsError):
    pass


class InsufficientResolutionError(ConeFrontsError):
    pass


class ExpansionError(ConeFrontsError):
    """A stored front is not contained in its successor."""


class ConfigError(ConeFrontsError):
    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
