"""Exception types raised by the constructions and verifiers."""


class LipsubError(Exception):
    """Base class for all package errors."""


class PreconditionError(LipsubError, ValueError):
    """An operation was called with inputs outside its contract."""


class NotLipschitzError(PreconditionError):
    """Partial data handed to an extension violates the requested bound.

    ``pair`` holds the first offending pair of point indices and ``ratio``
    the difference quotient found there.
    """

    def __init__(self, pair, ratio, bound):
        self.pair = pair
        self.ratio = ratio
        self.bound = bound
        super().__init__(
            f"data is not {bound:g}-Lipschitz: pair {pair} has quotient {ratio:.12g}"
        )


class UnsupportedDimension(PreconditionError):
    pass


class DegenerateBall(PreconditionError):
    """The unit ball is flat or unbounded, so it does not define a norm."""


class FacesExceedCapacity(LipsubError):
    def __init__(self, faces, n):
        self.faces = faces
        self.n = n
        super().__init__(f"{faces} faces cannot be realised in l_inf^{n} (need 2n >= {faces})")


class SiteSeparationError(PreconditionError):
    pass


class WitnessInvalid(LipsubError):
    def __init__(self, message, best_separation=None):
        self.best_separation = best_separation
        super().__init__(message)


class DepthExhausted(LipsubError):
    def __init__(self, requested, achieved, node=None):
        self.requested = requested
        self.achieved = achieved
        self.node = node
        where = f" at node {node!r}" if node is not None else ""
        super().__init__(f"requested depth {requested}, achieved {achieved}{where}")


class ResolutionTooCoarse(PreconditionError):
    def __init__(self, delta, eps, factor=0.25):
        self.delta = delta
        self.eps = eps
        super().__init__(f"resolution delta={delta:g} exceeds {factor:g}*eps={factor * eps:g}")


class DirectionNotLipschitz(PreconditionError):
    pass


class CoverageUncertified(LipsubError):
    def __init__(self, defect, tolerance):
        self.defect = defect
        self.tolerance = tolerance
        super().__init__(f"coverage defect {defect:.3g} exceeds tolerance {tolerance:.3g}")
