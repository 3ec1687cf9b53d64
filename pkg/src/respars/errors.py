"""Exception hierarchy.

The CLI maps these onto exit codes: ``GraphFormatError`` -> 2,
``PreconditionError`` -> 3.
"""


class ResparsError(Exception):
    """Base class for all library errors."""


class GraphFormatError(ResparsError, ValueError):
    """Malformed edge-list input or an invalid edge (self-loop, bad weight)."""


class PreconditionError(ResparsError, ValueError):
    """An operation was called outside its domain (epsilon range, etc.)."""


class DisconnectedGraphError(PreconditionError):
    pass


class DenseLimitError(PreconditionError):
    """The dense exact oracle refuses graphs above the configured vertex cap."""


class NotALaplacianError(PreconditionError):
    pass


class SolverError(ResparsError, RuntimeError):
    """An iterative solve failed to reach its tolerance inside an oracle build."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row
