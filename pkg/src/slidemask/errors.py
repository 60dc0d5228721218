"""Exception types raised across the package."""


class SlidemaskError(Exception):
    """Base class for all package errors."""


class ShapeError(SlidemaskError, ValueError):
    """Array dimensions do not agree with each other or with a config."""


class InputTooShortError(SlidemaskError, ValueError):
    """Signal or sequence shorter than one frame / one context window."""


class AudioFormatError(SlidemaskError, ValueError):
    """WAV file is not mono 16-bit PCM at the required sample rate."""


class DataError(SlidemaskError, ValueError):
    """Manifest, dataset or checkpoint content is unusable."""


class ConfigError(SlidemaskError, ValueError):
    """Unknown key or invalid value in a run configuration."""


class NumericalError(SlidemaskError, ArithmeticError):
    """Training produced a non-finite value."""
