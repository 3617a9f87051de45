"""Exception types raised by blockprox."""


class BlockProxError(Exception):
    """Base class for all package errors."""


class BacktrackExhausted(BlockProxError):
    """No stepsize in the backtracking grid satisfied the descent criterion."""


class NonFiniteObjective(BlockProxError):
    """The objective, a gradient or a prox output became NaN or infinite."""

    def __init__(self, iteration, what="objective"):
        self.iteration = iteration
        self.what = what
        super().__init__(f"non-finite {what} at iteration {iteration}")


class StrongConvexityViolated(BlockProxError, ValueError):
    """Scalar prox subproblem is not strongly convex for the given weight."""


class ZeroVector(BlockProxError, ValueError):
    """A nonzero vector was required."""


class ZeroColumn(BlockProxError):
    """A factor column vanished where the update needs it to be nonzero."""


class DegenerateColumn(BlockProxError, ValueError):
    """A design column has zero variance after centering."""


class DimensionMismatch(BlockProxError, ValueError):
    """Array shapes are incompatible."""


class FormatError(BlockProxError, ValueError):
    """A matrix/tensor text file is malformed."""
