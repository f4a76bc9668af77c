"""Exception types raised by the geometry engine and chain builder."""


class UnichainError(Exception):
    """Base class for all package-specific errors."""


# geometry


class NoDifference(UnichainError):
    """Set difference Q \\ P is empty (Q is contained in P)."""


# triangulation


class EmptyFamily(UnichainError):
    """A joint refinement was requested for an empty family."""


class PointOutside(UnichainError):
    """A vertex insertion point lies outside the triangulated set."""


class UnsupportedDimension(UnichainError):
    """Cube triangulations are only provided for dimensions 1 through 4."""


class DesingularizationError(UnichainError):
    """The blow-up loop exceeded its iteration cap without certifying."""


class RegularityError(UnichainError):
    """A triangulation failed the regularity (unimodularity) check."""


# zmap


class DenominatorViolation(UnichainError):
    """A vertex value has a denominator not dividing the vertex denominator."""


class IntegralityFailure(UnichainError):
    """An interpolated piece admits no integer coefficient matrix."""


class OutsideDomain(UnichainError):
    """A point or region lies outside a map's domain."""


class ImageEscapesDomain(UnichainError):
    """The image of the inner map is not contained in the outer map's domain."""


class CarrierMismatch(UnichainError):
    """Two maps do not share the same carrier or codomain dimension."""


class NotStrict(UnichainError):
    """The inclusion of polyhedra is not strict."""


class OutsideHierarchy(UnichainError):
    """The smaller polyhedron is not contained in the larger one."""


# term language


class ParseError(UnichainError):
    """Malformed term text.  Carries the offending position."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ArityError(UnichainError):
    """A variable index exceeds the declared number of variables."""

    def __init__(self, message: str, position: int = -1) -> None:
        super().__init__(message)
        self.position = position


class UnsupportedArity(UnichainError):
    """Problem arity outside the supported range 1..4."""


class DimensionMismatch(UnichainError):
    """A candidate unifier has the wrong codomain dimension or domain."""


# squeezing

class ZeroDirection(UnichainError):
    """The direction vector v must be nonzero."""


class PreconditionViolated(UnichainError):
    """Interior stepping directions violate an active constraint."""


class DimensionTooLow(UnichainError):
    """The construction needs dimension at least 2."""


class ConstantOnFace(UnichainError):
    """The affine map is constant on the selected face."""


class ConstantOnBoundary(UnichainError):
    """The map is constant on the cube boundary."""


# cover


class ConstantOnCorners(UnichainError):
    """The map is constant on the cube corners."""


class NotIntoBoundary(UnichainError):
    """The map does not send its domain into the boundary square."""


class BadInterval(UnichainError):
    """Interval endpoints must be integers with a < b."""
