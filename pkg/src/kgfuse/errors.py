"""Exception hierarchy shared across the toolkit."""


class KgfuseError(Exception):
    """Base class for all toolkit errors."""


class DataError(KgfuseError):
    """Malformed or inconsistent dataset / embedding files."""


class NumericError(KgfuseError):
    """Non-finite values or other numeric failures during training."""
