"""Exception classes. Each carries the CLI exit code for its failure class."""


class SteerkitError(Exception):
    exit_code = 5


class ValidationError(SteerkitError, ValueError):
    """Input violates a type invariant (not a state, not unit, ...)."""

    exit_code = 2


class DomainError(ValidationError):
    """Parameter outside its allowed range."""


class ContractError(ValidationError):
    """Precondition on the form of the input not met (e.g. non-canonical frame)."""


class InsufficientDataError(SteerkitError):
    exit_code = 3


class OutOfRegimeError(SteerkitError, ValueError):
    """Evaluation requested outside the regime where a criterion was derived."""

    exit_code = 4


class SolverError(SteerkitError, RuntimeError):
    exit_code = 5


class EstimatorError(SteerkitError, RuntimeError):
    """Too many Monte Carlo samples failed."""

    exit_code = 5
