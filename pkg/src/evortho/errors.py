"""Exception hierarchy shared by all evortho modules."""


class EvorthoError(Exception):
    """Base class for all errors raised by evortho."""


class DomainError(EvorthoError, ValueError):
    """An argument lies outside the domain where a formula is valid."""


class InvalidParameterError(DomainError):
    """Distribution parameters are invalid (e.g. non-positive scale)."""


class ChartDomainError(DomainError):
    """Coordinates fall outside the domain of an orthogonal chart."""


class InfeasibleDataError(EvorthoError, ValueError):
    """No parameter value gives the data a finite likelihood."""


class DegenerateDataError(EvorthoError, ValueError):
    """Data has too little variation for the requested statistic."""


class SingularMatrixError(EvorthoError, ArithmeticError):
    pass


class StepUnderflowError(EvorthoError, ArithmeticError):
    """Relative finite-difference step collapsed because a coordinate is ~0."""


class NonConvergenceError(EvorthoError, RuntimeError):
    pass
