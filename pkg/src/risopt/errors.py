"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Invalid wire geometry: bad axis, overlapping segments, degenerate sizes."""


class ScenarioError(ValueError):
    """Scenario file failed validation; message carries the offending field path."""


class SingularMatrixError(RuntimeError):
    """A linear system in the channel composition is numerically singular."""


class NumericalError(RuntimeError):
    """An internal consistency check failed (stale cache, non-finite values)."""


class ConvergenceError(RuntimeError):
    """Optimizer aborted after sustained objective decrease; carries the trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []
