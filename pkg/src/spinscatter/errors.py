"""Exception hierarchy shared by all modules."""


class SpinScatterError(Exception):
    """Base class for library errors."""


class InvalidParameterError(SpinScatterError, ValueError):
    """A physical parameter is non-finite or outside its allowed range."""


class UnsupportedConfigurationError(SpinScatterError):
    """The requested closed form does not cover this drive configuration."""


class SingularParameterError(SpinScatterError):
    """A closed-form expression hits a pole at these parameters."""


class CriticalDampingError(SingularParameterError):
    """Effective precession frequency vanishes; the eigenbasis is defective.

    Use the numerical (resolvent) path instead.
    """


class GridTooCoarseError(SpinScatterError, ValueError):
    """Sampling grid does not resolve a spectral feature."""


class ConsistencyError(SpinScatterError, RuntimeError):
    """An internal numerical consistency check failed."""
