"""Exception types shared across pivlab."""


class PivlabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PivlabError, ValueError):
    """An argument lies outside the domain of an operation (zero divisor, coincident points, ...)."""


class UnsupportedInputError(PivlabError, ValueError):
    pass


class ArityError(PivlabError, ValueError):
    pass


class DegenerateFamilyError(PivlabError, ValueError):
    """A Wronskian that the construction divides by vanishes identically."""


class NotInClassError(PivlabError, ValueError):
    """A rational function is not of the form sum m_i/(z - z_i) + nu - mu*z with integer m_i."""


class PrecisionError(PivlabError, ArithmeticError):
    pass


class PreconditionError(PivlabError, ValueError):
    pass


class ConstructionError(PivlabError, RuntimeError):
    """No dressing chain could be assembled from the candidate steps."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []
