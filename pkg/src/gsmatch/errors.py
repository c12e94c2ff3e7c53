"""Exception hierarchy shared by the library and the command line."""


class GsmError(Exception):
    """Base class for all errors raised by gsmatch."""


class GraphParseError(GsmError, ValueError):
    """Malformed graph or label input."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DisconnectedQueryError(GsmError, ValueError):
    """The query graph is not connected."""


class ResourceLimitError(GsmError):
    """The partial-result table outgrew its configured row cap."""

    def __init__(self, iteration, rows, max_rows):
        super().__init__(
            f"iteration {iteration}: {rows} partial rows exceed max_rows={max_rows}"
        )
        self.iteration = iteration
        self.rows = rows
        self.max_rows = max_rows


class GenerationError(GsmError):
    """A workload generator could not satisfy its request."""


class BudgetExceededError(GsmError):
    """The reference matcher ran past its node-expansion budget."""
