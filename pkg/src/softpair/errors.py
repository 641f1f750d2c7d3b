"""Exception hierarchy for the simulator.

Every error raised on purpose by this package derives from SoftpairError so
callers (and the command line driver) can map failures to exit codes without
string matching.
"""


class SoftpairError(Exception):
    """Base class for all package errors."""


class ParameterError(SoftpairError, ValueError):
    """A value passed to a constructor or function is out of its domain."""


class NormalizationError(ParameterError):
    """A state vector or direction fails its unit-norm invariant."""


class ConditioningError(SoftpairError):
    """Conditioning on a zero-probability measurement outcome."""


class InfeasibleSampleError(SoftpairError):
    """A photon sample was requested that no draw can satisfy.

    Example: k photons of energy at least e_min cannot fit a budget
    lam < k * e_min.
    """


class GenerationError(SoftpairError):
    """Event generation failed; carries the index of the offending event."""

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        if index is not None:
            message = f"event {index}: {message}"
        super().__init__(message)


class UndersampleError(SoftpairError):
    """An estimator has too few events to produce a finite uncertainty."""


class ConfigError(SoftpairError):
    """A run configuration does not parse or validate.

    Carries the dotted field name and, when read from text, the line number.
    """

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        prefix = ""
        if field is not None:
            prefix = f"{field}: "
        if line is not None:
            prefix = f"line {line}: " + prefix
        super().__init__(prefix + message)


class EventLogError(SoftpairError):
    """An event log is missing, malformed, or marked incomplete."""
