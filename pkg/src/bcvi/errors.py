"""Exception hierarchy.

Each top-level class maps to one CLI exit code, so callers can tell a bad
config from a bad dataset or a numerical failure without parsing messages.
"""

from __future__ import annotations


class BcviError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1

    def __init__(self, message: str, *, k: int | None = None):
        self.k = k
        if k is not None:
            message = f"k={k}: {message}"
        super().__init__(message)

    def at_k(self, k: int) -> "BcviError":
        """Tag the error with the cluster count it occurred at (in place)."""
        if self.k is None:
            self.k = k
            self.args = (f"k={k}: {self.args[0] if self.args else ''}",)
        return self


class ConfigError(BcviError, ValueError):
    exit_code = 2


class DataError(BcviError, ValueError):
    exit_code = 3


class MissingFileError(DataError, FileNotFoundError):
    pass


class EmptyFileError(DataError):
    pass


class NonNumericCellError(DataError):
    def __init__(self, row: int, column: int, value: str):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"non-numeric cell {value!r} at row {row}, column {column}")


class RaggedRowError(DataError):
    def __init__(self, row: int, expected: int, found: int):
        self.row = row
        self.expected = expected
        self.found = found
        super().__init__(f"row {row} has {found} fields, expected {expected}")


class ClusteringError(BcviError, ValueError):
    exit_code = 4


class CviError(BcviError, ValueError):
    """A validity index is undefined for the given clustering."""

    exit_code = 5


class BayesError(BcviError, ValueError):
    exit_code = 6


class OutputError(BcviError, OSError):
    exit_code = 7
