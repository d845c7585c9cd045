"""Exception hierarchy. Every domain failure raised by the engine derives from CepError."""

from __future__ import annotations


class CepError(Exception):
    """Base class for domain errors (mapped to exit code 1 by the CLI)."""


class OrderingError(CepError, ValueError):
    pass


class ProductFormatError(CepError, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class FlowError(CepError):
    pass


class FixingConflictError(FlowError):
    pass


class LifecycleError(CepError):
    pass


class PermitError(LifecycleError):
    pass


class CurveError(CepError, ValueError):
    pass


class StoreError(CepError):
    pass


class DuplicateBookingError(StoreError):
    pass
