"""Exception types shared across the package."""


class QmcboundError(Exception):
    """Base class for all qmcbound errors."""


class ValidationError(QmcboundError, ValueError):
    """Invalid parameters, malformed graphs, or out-of-domain arguments."""


class EdgeListParseError(ValidationError):
    """Edge-list file could not be parsed; carries the offending line number."""

    def __init__(self, path, line_no, message):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class InvalidProgramError(ValidationError):
    """Conic program is malformed (dimension mismatch, bad cone list)."""


class NumericalError(QmcboundError, RuntimeError):
    """A numerical routine could not reach the requested tolerance."""


class InconsistentSolutionError(QmcboundError):
    """A relaxation solution violates a guarantee it should satisfy.

    Raised, for example, when the high-value edge set of a purported
    feasible solution is not a matching; this signals an infeasible or
    over-tolerant input and is never silently repaired.
    """
