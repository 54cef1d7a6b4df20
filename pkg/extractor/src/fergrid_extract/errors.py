"""Exception taxonomy for the extractor."""


class ExtractError(Exception):
    """Base class for all extractor failures."""


class ConfigError(ExtractError):
    """Invalid CLI arguments or option values."""


class DataError(ExtractError):
    """Bad manifest contents or unreadable image data."""


class EncoderError(ExtractError):
    """Unknown encoder id, or the encoder cannot be loaded or applied."""
