"""Exception types raised by the toolkit."""


class WncError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(WncError, ValueError):
    pass


class RankError(WncError, ValueError):
    """A generator matrix does not have full row rank."""

    def __init__(self, message: str, source: int | None = None):
        super().__init__(message)
        self.source = source


class ScheduleError(WncError, ValueError):
    """A transmit schedule asks a relay for an estimate it cannot have."""

    def __init__(self, message: str, slot: int | None = None):
        super().__init__(message)
        self.slot = slot


class NotAchievableError(WncError, ValueError):
    """Greedy construction ran out of candidates before reaching dimension k."""

    def __init__(self, message: str, best_dimension: int):
        super().__init__(message)
        self.best_dimension = best_dimension


class ComplexityError(WncError, ValueError):
    """Enumeration would exceed the configured size guard."""


class ParseError(WncError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(WncError, ValueError):
    pass


class BracketError(WncError, ValueError):
    """A target BER is not bracketed by a simulated curve."""
