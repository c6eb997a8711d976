"""Exception hierarchy. One class per failure mode the library can signal."""


class SkewlavError(Exception):
    """Base class for all library errors."""


class NotNormalForm(SkewlavError):
    """Map coefficients do not match the required local normal form."""

    def __init__(self, what, expected, got):
        self.what, self.expected, self.got = what, expected, got
        super().__init__(f"{what}: expected {expected}, got {got}")


class HypothesisViolated(SkewlavError):
    """Constant hypotheses fail (b <= 1/4, b or beta0 not real, ...)."""


class DegenerateDirections(SkewlavError):
    """b = 1/4: the two characteristic directions coincide."""


class LinearSystemSingular(SkewlavError):
    def __init__(self, order):
        self.order = order
        super().__init__(f"jet coefficient equation singular at order {order}")


class NotInBasin(SkewlavError):
    """Orbit failed to enter the incoming petal within the iteration budget."""


class NoConvergence(SkewlavError):
    def __init__(self, msg, last_delta=None):
        self.last_delta = last_delta
        super().__init__(msg)


class OutOfHalfPlane(SkewlavError):
    """Incoming inverse requested outside the half-plane Re Z > R0."""


class NotInOutgoingPetal(SkewlavError):
    pass


class InverseBranchLost(SkewlavError):
    """Backward Newton branch left the outgoing petal."""


class OutsideDomain(SkewlavError):
    """Horn-map argument outside the operational domain U_{q0}."""


class ExitedDomain(SkewlavError):
    """Horn-family orbit has no valid lift into U_{q0}."""


class AtPuncture(SkewlavError):
    """Horn-family orbit sits at one of the punctures 0 or infinity."""


class BranchMismatch(SkewlavError):
    pass


class OutOfRange(SkewlavError):
    pass


class OutOfStrip(SkewlavError):
    pass


class OutsideRectangle(SkewlavError):
    pass


class LeftRectangle(SkewlavError):
    def __init__(self, j, msg=""):
        self.j = j
        super().__init__(msg or f"trace left the admissible rectangle at step {j}")


class PrecisionBudgetExceeded(SkewlavError):
    def __init__(self, estimate, tolerance):
        self.estimate, self.tolerance = estimate, tolerance
        super().__init__(
            f"estimated roundoff {estimate:.2e} exceeds tolerance {tolerance:.2e}"
        )


class NotIncreasing(SkewlavError):
    pass


class BetaNonzero(SkewlavError):
    pass


class TooShort(SkewlavError):
    pass


class SeriesTailTooLarge(SkewlavError):
    pass


class PrecisionHorizonExceeded(SkewlavError):
    pass


class NoCriticalPointFound(SkewlavError):
    pass


class CycleNotRefined(SkewlavError):
    pass


class OrbitLeftNeighborhood(SkewlavError):
    pass


class OnCut(SkewlavError):
    pass


class JetOrderInsufficient(SkewlavError):
    pass
