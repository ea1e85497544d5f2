"""Exception types shared across the package."""


class KgcnError(Exception):
    """Base class for all package errors."""


class ShapeError(KgcnError):
    """Operands have incompatible dimensions."""


class InvalidEdge(KgcnError):
    """Edge endpoint outside the node range."""


class InsufficientLabels(KgcnError):
    """A labelled split cannot be formed from the given labels."""


class NumericalError(KgcnError):
    """An iterative numerical routine failed to converge or broke down."""


class TooLarge(KgcnError):
    """Problem size exceeds the limit of the requested dense method."""


class EmptyMask(KgcnError):
    """An index set that must be nonempty is empty."""


class NotLinear(KgcnError):
    """Operation requires identity activations."""


class BadConfig(KgcnError):
    """Run configuration failed schema validation."""


class MissingDataset(KgcnError):
    """Dataset container directory not found or incomplete."""


class RangeWarning(UserWarning):
    """Hyperparameter outside the documented search range (not an error)."""
