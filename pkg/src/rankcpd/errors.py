"""Exception and warning types raised across the package."""


class RankCPDError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(RankCPDError, ValueError):
    pass


class DimensionMismatchError(RankCPDError, ValueError):
    pass


class CountMismatchError(RankCPDError, ValueError):
    pass


class NonFiniteError(RankCPDError, ValueError):
    pass


class SolverError(RankCPDError, RuntimeError):
    """A solver produced an infeasible plan (indicates a bug, not bad input)."""


class SeriesTooShortError(RankCPDError, ValueError):
    pass


class ParseError(RankCPDError, ValueError):
    """Malformed input file. ``row`` and ``column`` are 1-based when known."""

    def __init__(self, message, path=None, row=None, column=None):
        self.path = path
        self.row = row
        self.column = column
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ConvergenceWarning(UserWarning):
    """Sinkhorn stopped at its iteration budget above the requested tolerance."""
