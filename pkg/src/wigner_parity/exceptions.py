"""Exception hierarchy.

Contract and domain errors are ``ValueError`` subclasses so that callers
validating user input can catch them the usual way; numerical failures
derive from ``ArithmeticError`` and carry a ``details`` mapping that the
CLI serializes to JSON.
"""


class WignerError(Exception):
    """Base class for all package errors."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self), **self.details}


class ContractError(WignerError, ValueError):
    """Inputs violate a documented precondition (grid mismatch, wrong parity, ...)."""


class DomainError(WignerError, ValueError):
    """Evaluation point outside the region where a quantity is defined."""


class CapabilityError(WignerError, ValueError):
    """Requested quantity is not available for this potential family."""


class NumericalError(WignerError, ArithmeticError):
    """A numerical procedure failed or lost accuracy."""


class QuadratureError(NumericalError):
    pass


class DivergenceError(NumericalError):
    pass


class AssemblyError(NumericalError):
    pass


class IllPosedError(NumericalError):
    pass
