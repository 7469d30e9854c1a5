"""Exception hierarchy. Each error carries the CLI exit code it maps to."""


class OdhdError(Exception):
    """Base class for all odhd-cim errors."""
    exit_code = 1


class ConfigError(OdhdError):
    """Bad or missing configuration, unknown preset, unpriced trace event."""
    exit_code = 2


class ParseError(OdhdError):
    """Malformed dataset file."""
    exit_code = 3

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CapacityError(OdhdError):
    """The mat cannot hold the seed segment."""
    exit_code = 4


class DomainError(OdhdError, ArithmeticError):
    """Arithmetic outside its domain, e.g. cosine of a zero vector."""
    exit_code = 5


class InvalidArgumentError(OdhdError, ValueError):
    exit_code = 6


class LayoutError(OdhdError):
    """Rows are not placed where an in-memory operation needs them."""
    exit_code = 7
