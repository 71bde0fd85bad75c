"""Exception types shared across the package."""


class InputError(ValueError):
    """Caller supplied values outside an operation's contract."""


class StructureError(ValueError):
    """Inconsistent incidence structure (e.g. a component touching no block)."""


class InternalError(RuntimeError):
    """Solver self-check failure; carries a diagnostic payload."""


class CacheConsistencyError(InternalError):
    """Incremental residual caches drifted from a from-scratch recomputation."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DescentViolationError(InternalError):
    """Objective increased beyond tolerance in a mode that guarantees descent."""


class ErrorBoundWitnessError(RuntimeError):
    """A sample point refutes the generalized error bound: zero residual
    mapping but positive distance to the optimal set."""

    def __init__(self, message, witnesses=None):
        super().__init__(message)
        self.witnesses = witnesses or []
