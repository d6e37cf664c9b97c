"""Exception types shared across the package.

The CLI maps these onto its exit-code contract (1 = input error,
2 = validation/policy failure, 3 = resource cap), so library code should
raise the most specific type that applies.
"""


class MatmultError(Exception):
    """Base class for all package errors."""


class LawFormatError(MatmultError, ValueError):
    """A law file (or law dictionary) could not be parsed."""


class InvariantError(MatmultError, ValueError):
    """Structurally valid input violates a documented invariant or precondition."""


class CapExceededError(MatmultError, RuntimeError):
    """A configured resource cap (dimension, memory, enumeration budget) was hit."""


class IntegrityError(MatmultError, RuntimeError):
    """An internal consistency check failed; flagged for investigation."""


class IllConditionedError(MatmultError, RuntimeError):
    """A numerical fit is too ill-conditioned to trust."""
