class QvmError(Exception):
    pass


class DomainError(QvmError, ValueError):
    """Argument outside the operation's domain (bad index, size mismatch, unknown name)."""


class ValidationError(QvmError, ValueError):
    """Structurally invalid object: non-unitary gate, malformed circuit, zero-norm state."""


class ResourceError(QvmError):
    """Request exceeds a configured size limit."""


class AlgorithmFailure(QvmError):
    """A randomized algorithm exhausted its retry budget.

    ``report`` carries the per-attempt diagnostics so callers can inspect
    what was tried.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}
