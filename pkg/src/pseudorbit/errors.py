"""Exception types shared across the package."""


class PseudorbitError(Exception):
    """Base class for all package-specific errors."""


class DomainError(PseudorbitError):
    """A point lies outside the set an operation is defined on."""


class DiscontinuityError(PseudorbitError):
    """Evaluation requested exactly at a branch endpoint; the caller must pick a side."""


class StructuralError(PseudorbitError):
    """A map/partition combination violates a structural precondition."""


class MarginViolationError(PseudorbitError):
    """A skew-product step left the base interval; the noise level is too large."""


class BoundaryError(PseudorbitError):
    """Strict boundary mode: noise support crosses the domain boundary."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConvergenceError(PseudorbitError):
    """An iterative solve did not reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NumericalError(PseudorbitError):
    """A numerical routine returned an unusable result."""


class MetastabilityStructureError(PseudorbitError):
    """The perturbed spectrum does not have the one-simple-unit-eigenvalue,
    real-second-eigenvalue shape that a metastability report requires."""


class EpsTooLargeError(PseudorbitError):
    """Distinct least-element hulls overlap at this noise level."""


class PartitionMismatchError(PseudorbitError):
    """Two objects were built over different partitions."""
