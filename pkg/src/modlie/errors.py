"""Exception hierarchy shared by every module."""


class ModLieError(Exception):
    """Base class for all errors raised by modlie."""


class StructuralError(ModLieError, ValueError):
    """Inputs with mismatched shapes, rings or algebras."""


class DivisibilityError(ModLieError, ArithmeticError):
    """An element of Z/p^2 expected to be divisible by p was not."""


class InvertibilityError(ModLieError, ArithmeticError):
    """A scalar that must be a unit in the target ring is not."""


class NotRestrictedUnderRealization(ModLieError):
    """The p-th power of a basis matrix leaves the span of the basis."""


class MissingPMap(ModLieError):
    """No p-map source (explicit values or matrices) is available."""


class ValidationFailure(ModLieError):
    """A presentation failed antisymmetry, Jacobi or realization checks."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ResourceLimit(ModLieError):
    """A degree-truncated computation would exceed the monomial cap."""


class DegreeCapTooSmall(ModLieError):
    """The filtration degree cap is too small for an honest answer."""

    def __init__(self, message, suggested=None):
        super().__init__(message)
        self.suggested = suggested


class PreservationFailure(ModLieError):
    """An endomorphism failed to preserve an ideal within the degree budget."""


class InvalidCharacter(ModLieError, ValueError):
    """A linear functional that does not vanish on the derived algebra."""


class NotNilpotent(ModLieError):
    """An operation requiring a nilpotent Lie algebra got something else."""


class NoGoodPrimes(ModLieError):
    """Every requested prime has bad reduction for the input."""


class ParseError(ModLieError, ValueError):
    """Malformed algebra file or polynomial expression."""
