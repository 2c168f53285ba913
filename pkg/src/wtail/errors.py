"""Exception hierarchy shared by all wtail modules."""


class WtailError(Exception):
    """Base class for every error raised by this package."""


class KRangeError(WtailError, ValueError):
    """Number of upper order statistics k is outside [1, n-1]."""


class DomainError(WtailError, ValueError):
    """Data violates a mathematical domain requirement (non-positive
    values, tied threshold with a negative exponent, ...)."""


class ParameterError(WtailError, ValueError):
    """A tuning parameter is outside its admissible range."""


class UnsupportedModelError(WtailError):
    """The requested closed-form computation is not available for this
    second-order class (missing slow-variation constant)."""


class DegenerateSampleError(WtailError):
    """Fewer than two positive observations survived truncation."""


class DegenerateRunError(WtailError):
    """A Monte-Carlo summary would be based on too few defined
    replications to be trusted."""


class ConfigError(WtailError):
    """Invalid run configuration.

    Carries an optional file/line anchor so the CLI can point at the
    offending entry.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        super().__init__(message)

    def __str__(self):
        msg = super().__str__()
        if self.path is not None and self.line is not None:
            return f"{self.path}:{self.line}: {msg}"
        if self.path is not None:
            return f"{self.path}: {msg}"
        return msg
