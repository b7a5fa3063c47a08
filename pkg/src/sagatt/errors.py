"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Array dimensions do not satisfy an operation's contract."""


class ConfigError(ValueError):
    """A configuration value is out of its allowed range."""


class DegenerateInputError(ValueError):
    """Input too small or too ill-conditioned for the requested statistic."""


class TokenFormatError(ValueError):
    """A token file is malformed (magic, payload size, or values)."""
