"""Exception types shared across the package."""


class BidValidationError(ValueError):
    """A bid schedule violates one of its structural conditions."""


class BreakpointViolation(BidValidationError):
    """Breakpoints unordered, wrong length, or outside the asset SoC range."""


class MonotonicityViolation(BidValidationError):
    """A charge or discharge price sequence increases along the SoC axis."""


class SpreadViolation(BidValidationError):
    """Top charge benefit (efficiency-adjusted) is not below the bottom discharge cost."""


class OutOfRange(ValueError):
    """A state-of-charge value lies outside the bid's breakpoint span."""


class DimensionMismatch(ValueError):
    """Array shapes inconsistent with the declared horizon or bus count."""


class InconsistentTrajectory(ValueError):
    """Fine-grained SoC path disagrees with base power, mileage, or totals."""


class InfeasiblePath(ValueError):
    """Induced SoC path leaves the feasible band."""


class NoFeasibleTrajectory(RuntimeError):
    """No discretized mileage sequence can meet the regulation totals within SoC bounds."""


class NonEdcrBid(ValueError):
    """Market clearing requires every storage bid to satisfy the equal-decremental-cost-ratio condition."""


class InfeasibleMarket(RuntimeError):
    """The clearing program has no feasible dispatch."""


class UnboundedMarket(RuntimeError):
    """The clearing program is unbounded below."""


class NumericalFailure(RuntimeError):
    """A solver returned a solution that fails its certification residuals."""


class InfeasibleConstraints(ValueError):
    """Bid-generation constraint set (bounds, monotonicity, ratio condition) is empty."""
