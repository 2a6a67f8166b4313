"""Exception hierarchy.

Every library error carries a stable ``code`` string; the command line front
end reports it verbatim and maps it to an exit status.
"""


class InfoGeomError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "DomainError"


class DimMismatch(InfoGeomError, ValueError):
    code = "DimMismatch"


class SingularMetric(InfoGeomError, ArithmeticError):
    code = "SingularMetric"


class EvalFailure(InfoGeomError, RuntimeError):
    code = "EvalFailure"


class RankError(InfoGeomError, ValueError):
    """Statistics are not minimal: ``[1, X]`` does not have full column rank."""

    code = "RankError"


class InvalidInput(InfoGeomError, ValueError):
    """A documented precondition on an argument is violated."""

    code = "InvalidInput"


class BadFace(InvalidInput):
    code = "BadFace"


class DegeneratePlane(InfoGeomError, ValueError):
    code = "DegeneratePlane"


class BlowUp(InfoGeomError, ArithmeticError):
    """ODE state left the finite range; ``partial`` holds what was integrated."""

    code = "BlowUp"

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NotSemisimple(InfoGeomError):
    code = "NotSemisimple"


class NonAssociative(InfoGeomError):
    code = "NonAssociative"


class NoDescent(InfoGeomError):
    code = "NoDescent"

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class IterLimit(InfoGeomError):
    code = "IterLimit"

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class UnsupportedOrder(InfoGeomError, ValueError):
    code = "UnsupportedOrder"


class EmptyTrace(InfoGeomError, ValueError):
    code = "EmptyTrace"


class ParseError(InfoGeomError, ValueError):
    code = "ParseError"


class IoError(InfoGeomError, OSError):
    code = "IoError"


class UsageError(InfoGeomError, ValueError):
    """Bad command line: unknown command, missing or malformed flag."""

    code = "UsageError"
