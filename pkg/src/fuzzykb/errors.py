"""Exception and warning types shared across the engine."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(EngineError):
    """Malformed input text (ARFF header, rule clause, ...)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(EngineError):
    """A value falls outside a declared domain (nominal value, class label, term)."""


class ValidationError(EngineError):
    """Inputs are structurally valid but violate a contract."""


class IngestionError(EngineError):
    """A prediction record stream is inconsistent with the dataset."""


class ConfigError(EngineError):
    """An out-of-range configuration value."""


class EngineWarning(UserWarning):
    """Non-fatal conditions: clamped values, degenerate columns, fallbacks."""
