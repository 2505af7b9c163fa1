"""Exception hierarchy.  ``exit_code`` maps onto the CLI's process status."""


class ZmslabError(Exception):
    exit_code = 1


class DomainError(ZmslabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(ZmslabError, ValueError):
    """Unsupported option combination or inconsistent ranges."""


class FitError(ZmslabError, ValueError):
    """Least-squares design is rank deficient or too narrow."""


class PrecisionError(ZmslabError):
    """Requested accuracy not reached; carries the achieved estimate."""

    exit_code = 2

    def __init__(self, message: str, achieved: float, value: float | None = None):
        super().__init__(message)
        self.achieved = achieved
        self.value = value


class CapacityError(ZmslabError):
    """A table, store or configured maximum is too small for the request."""

    exit_code = 3


class PersistenceError(ZmslabError, OSError):
    """Checkpoint or table file cannot be read or written."""

    exit_code = 3
