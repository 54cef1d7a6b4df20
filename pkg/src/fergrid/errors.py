"""Exception types shared across the package."""


class FergridError(Exception):
    """Base class for all package-specific errors."""


class FormatError(FergridError):
    """Malformed embedding-store file (bad header, record order, padding...)."""


class IncompleteStoreError(FergridError):
    """A (group, identity, expression) key is missing at some blur level."""


class DataError(FergridError):
    """Stored or supplied numeric data is invalid (non-finite values)."""


class IoError(FergridError):
    """Underlying file I/O failed."""


class ConfigError(FergridError):
    """Invalid or inconsistent experiment configuration."""


class NumericError(FergridError):
    """Non-finite value encountered inside the classifier."""


class ContractError(FergridError):
    """An internal call contract was violated (e.g. cross-block event)."""


class DegenerateBaselineError(FergridError):
    """Degradation table requested but the baseline Macro-F1 is zero."""


class RangeError(FergridError):
    """Tick outside the schedule's run range."""
