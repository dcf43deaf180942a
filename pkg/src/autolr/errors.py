"""Exception types shared across the library."""

from __future__ import annotations


class AutolrError(Exception):
    """Base class for all library errors."""


class ContractViolation(AutolrError, ValueError):
    """An argument broke a documented precondition (e.g. length mismatch)."""


class DivergedProbeError(AutolrError, ArithmeticError):
    """A probe evaluation produced a non-finite loss.

    Carries the step size that was being probed and the offending value.
    """

    def __init__(self, eta: float, value: float):
        self.eta = eta
        self.value = value
        super().__init__(f"probe diverged at eta={eta!r}: loss={value!r}")


class DivergenceError(AutolrError, ArithmeticError):
    """Training produced non-finite weights or losses."""


class SingularMatrixError(AutolrError, ValueError):
    """A linear solve hit a (numerically) rank-deficient system."""


class DataError(AutolrError, ValueError):
    """Base class for dataset ingestion problems."""


class CsvParseError(DataError):
    """A CSV cell failed to parse; names the offending row and column."""

    def __init__(self, row: int, column: str, cell: str):
        self.row = row
        self.column = column
        self.cell = cell
        super().__init__(f"cannot parse cell {cell!r} at row {row}, column {column}")


class SchemaError(DataError):
    """A required column is missing or the file shape is inconsistent."""


class IdxFormatError(DataError):
    """An IDX file has the wrong magic number or malformed header."""


class SplitSizeError(DataError):
    """Requested split sizes exceed the dataset size."""


class ConfigError(AutolrError, ValueError):
    """An experiment config file is missing, malformed, or inconsistent."""


class AlignmentError(AutolrError, ValueError):
    """Metrics files cannot be compared because logging cadences differ."""
