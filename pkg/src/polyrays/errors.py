"""Exception types shared across the package."""


class PolyraysError(Exception):
    """Base class for all domain and numeric failures raised by polyrays."""


class DomainError(PolyraysError):
    """Input violates a documented precondition (bad data, not bad luck)."""


class NumericError(PolyraysError):
    """A numeric procedure failed to converge or hit a resource cap."""


class SharedAngleError(DomainError):
    """Unlinkedness is undefined for blocks that share an angle."""


class CapExceededError(NumericError):
    """A combinatorial enumeration exceeded its resource cap."""


class RootFindingError(NumericError):
    """Simultaneous root finding did not converge within the restart budget."""


class NonEscapingPointError(DomainError):
    """The operation needs an escaping orbit but the point does not escape."""


class BranchAmbiguityError(NumericError):
    """A root branch could not be selected safely (no witness, or the
    direction estimate fell inside the guard band)."""


class LevelBelowCriticalError(DomainError):
    """Requested potential level does not exceed every critical value rate."""


class NewtonDivergenceError(NumericError):
    """Newton iteration left its basin or exceeded the iteration budget.

    ``last_iterate`` carries the best available iterate when one exists.
    """

    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class ContinuationStallError(NumericError):
    """Path continuation stalled; carries the last good parameter value
    and the accepted prefix of the path."""

    def __init__(self, message: str, last_good=None, samples=()):
        super().__init__(message)
        self.last_good = last_good
        self.samples = tuple(samples)


class NotInShiftLocusError(DomainError):
    """Polynomial does not have all critical values at a common positive rate."""


class AngleResolutionError(NumericError):
    """A recovered ray angle could not be snapped to an admissible rational."""

    def __init__(self, message: str, raw_angles=None):
        super().__init__(message)
        self.raw_angles = raw_angles


class MultiplicityCollisionError(NumericError):
    """Distinct critical points merged beyond tolerance during a solve."""


class BranchCollisionError(NumericError):
    """Boundary lift passed too close to a critical value to separate sheets."""


class DegenerateAnnulusError(DomainError):
    """Annulus specification has touching or crossing boundary circles."""


class OriginInRegionError(DomainError):
    """The cylinder-metric integrand needs the region to avoid the origin."""
