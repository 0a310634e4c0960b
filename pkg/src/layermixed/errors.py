"""Exception types raised across the package."""


class LayerMixedError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(LayerMixedError, ValueError):
    """An input parameter violates a documented precondition."""


class ConstructionError(LayerMixedError, RuntimeError):
    """A reference element could not be built (ill-conditioned DOF Gram matrix)."""


class UnsupportedOperationError(LayerMixedError, TypeError):
    """The requested operation needs data the object does not carry."""


class NumericalFailure(LayerMixedError, RuntimeError):
    """A factorization or iterative solve failed."""
