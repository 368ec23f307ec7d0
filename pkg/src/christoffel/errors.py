"""Exception types raised by the library.

Everything derives from ChristoffelError so callers can catch domain
failures in one clause while configuration mistakes (bad JSON, bad
flags) surface as DomainSpecError / ValueError.
"""


class ChristoffelError(Exception):
    """Base class for numeric/domain failures."""


class DomainSpecError(ChristoffelError):
    """A domain-specification document is malformed or inconsistent."""


# --- geometry ---------------------------------------------------------------

class PointOutsideDomain(ChristoffelError):
    """An operation required an interior/member point but got an outside one."""


class NoExteriorFound(ChristoffelError):
    """A ray never left the bounding box: the body's bbox is broken."""


class AnchorOutsideDomain(ChristoffelError):
    """The section anchor x + (delta - t) u is not a member of the body."""


class DeltaTooLarge(ChristoffelError):
    """Bound evaluation requires delta < beta / 2."""


class DegenerateProfile(ChristoffelError):
    """A section profile has a nonpositive sample where a positive one is required."""


class SingularTransform(ChristoffelError):
    """Affine transform with |det| below tolerance."""


# --- alpha ball -------------------------------------------------------------

class OutOfRange(ChristoffelError):
    """Argument outside the validity range of a closed form."""


class ConvergenceFailure(ChristoffelError):
    """An iterative solve did not reach its residual target."""


class NonNegativeCurvature(ChristoffelError):
    """Tangent-parabola intersection needs strictly negative curvature."""


class BracketFailure(ChristoffelError):
    """Root bracketing sign conditions failed (argument out of validity range)."""


class TooCloseToBoundary(ChristoffelError):
    """delta < sigma * n**-2: the point is outside the regime handled here."""


# --- moments / evaluator ----------------------------------------------------

class InsufficientMoments(ChristoffelError):
    """The moment table does not cover the requested polynomial degree."""


class NonConvergence(ChristoffelError):
    """Adaptive quadrature refinement stalled before reaching tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class FactorizationFailure(ChristoffelError):
    """Cholesky factorization hit a nonpositive pivot (precision exhausted)."""
