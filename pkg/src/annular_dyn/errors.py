"""Exception hierarchy shared by all modules."""


class AnnularDynError(Exception):
    """Base class for every error raised by this package."""


class RangeExceeded(AnnularDynError):
    """A value left the representable range (or lost its argument)."""


class DomainError(AnnularDynError, ValueError):
    pass


class InvalidR(AnnularDynError, ValueError):
    pass


class IndexBeyondDepth(AnnularDynError):
    def __init__(self, last_index, message=None):
        self.last_index = last_index
        super().__init__(message or f"modulus beyond stored partition depth (last index {last_index})")


class RelabelViolation(AnnularDynError):
    pass


class Indeterminate(AnnularDynError):
    pass


class HypothesisFailed(AnnularDynError):
    """Raised with the list of failed hypotheses; ``report`` keeps partial results."""

    def __init__(self, failed, report=None):
        self.failed = list(failed)
        self.report = report
        super().__init__("hypotheses failed: " + ", ".join(self.failed))


class BoundaryZero(AnnularDynError):
    pass


class NonIntegerResidual(AnnularDynError):
    pass


class NeitherCovered(AnnularDynError):
    pass


class PreconditionError(AnnularDynError, ValueError):
    pass


class TooShort(AnnularDynError):
    pass


class DegenerateInnerAnnulus(AnnularDynError):
    pass


class CeilingViolated(AnnularDynError):
    pass


class NoFeasibleR(AnnularDynError):
    pass


class Unrealizable(AnnularDynError):
    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)


class DepthExceeded(AnnularDynError):
    def __init__(self, message, partial=None):
        self.partial = partial
        super().__init__(message)


class ChainTooShort(AnnularDynError):
    pass


class RateViolation(AnnularDynError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"rate violates a_(n+1) <= M(a_n) at n={index}")


class InsufficientBranching(AnnularDynError):
    def __init__(self, message, slowness_check=None):
        self.slowness_check = slowness_check
        super().__init__(message)


class NoPreimageFound(AnnularDynError):
    pass


class RealizationFailed(AnnularDynError):
    def __init__(self, depth_reached, partial=None):
        self.depth_reached = depth_reached
        self.partial = partial
        super().__init__(f"realization failed after depth {depth_reached}")
