"""Exception hierarchy shared by all sapkit modules."""


class SapError(Exception):
    """Base class for sapkit errors."""


class ValidationError(SapError, ValueError):
    """Physical parameters violate a pulse or config invariant."""


class DomainError(SapError, ValueError):
    """A time argument lies outside the pulse support ``[0, tau]``."""


class SolverError(SapError, RuntimeError):
    """Time integration or quadrature failed to meet its accuracy contract."""
