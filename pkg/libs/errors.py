class TrendPermError(Exception):
    """Base class for every error raised by trendperm."""


class DomainError(TrendPermError, ValueError):
    """Argument outside its domain: bad window, bandwidth, NaN input, short series..."""


class TieError(DomainError):
    """Tied values in a series that must be tie-free."""


class LimitError(TrendPermError):
    """Exact enumeration requested above the enumeration limit."""


class ConfigError(TrendPermError, ValueError):
    """Malformed config, series or result file."""

    def __init__(self, message, line=None, key=None, source=None):
        self.message = message
        self.line = line
        self.key = key
        self.source = source
        prefix = f"{source}: " if source else ""
        if line is not None:
            prefix += f"line {line}: "
        super().__init__(prefix + message)
