"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes; library callers can catch
:class:`RuberError` to intercept everything raised deliberately.
"""


class RuberError(Exception):
    """Base class for all errors raised on purpose by this package."""


class ParseError(RuberError):
    """A file could not be parsed; carries the offending location."""

    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class ValidationError(RuberError):
    """Input data is structurally parseable but violates a documented rule."""


class ConfigError(RuberError):
    """A configuration value (flag or config-file key) is unusable."""


class NumericalError(RuberError):
    """A computation produced non-finite values or otherwise lost meaning."""


class CheckpointFormatError(RuberError):
    """A checkpoint file is truncated, corrupt, or of an unknown version."""


class CompatibilityError(RuberError):
    """A checkpoint does not match the supplied vocabulary or embeddings."""
