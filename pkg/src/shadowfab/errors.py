class DomainError(ValueError):
    """An argument lies outside the physical or mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """A required configuration value is missing or invalid."""


class InputError(ValueError):
    """Malformed input data (CSV rows, traces, problem definitions)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
