"""Exception hierarchy.

Every error carries a stable ``code`` used by the CLI error documents and an
``exit_code``: 2 for violated preconditions, 3 for numerical failures.
"""


class HeisenspecError(Exception):
    code = "HeisenspecError"
    exit_code = 3

    def __init__(self, message="", **detail):
        super().__init__(message)
        self.detail = detail


class PreconditionError(HeisenspecError, ValueError):
    code = "PreconditionViolated"
    exit_code = 2


class InvalidArgument(PreconditionError):
    code = "InvalidArgument"


class DimensionMismatch(PreconditionError):
    code = "DimensionMismatch"


class SingularFrame(PreconditionError):
    code = "SingularFrame"


class ConditionViolated(PreconditionError):
    code = "ConditionViolated"


class DivergentIntegral(PreconditionError):
    code = "DivergentIntegral"


class GridTooLarge(PreconditionError):
    code = "GridTooLarge"


class NumericalError(HeisenspecError, ArithmeticError):
    code = "NumericalError"
    exit_code = 3


class ToleranceNotMet(NumericalError):
    code = "ToleranceNotMet"


class FitFailed(NumericalError):
    code = "FitFailed"


class AssemblyFault(NumericalError):
    code = "AssemblyFault"


class InconsistencyFault(NumericalError):
    """An internal invariant that the preconditions should make unreachable."""

    code = "InconsistencyFault"
