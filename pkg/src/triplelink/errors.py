"""Exception types shared across the package."""


class SeparationError(ValueError):
    """Two points that must stay apart came closer than the guard distance."""


class SingularityError(ValueError):
    """A Green-form kernel was evaluated too close to its singular set.

    ``node`` holds the offending grid index when the failure happened while
    sampling a pullback.
    """

    def __init__(self, message, node=None, distance=None):
        super().__init__(message)
        self.node = node
        self.distance = distance


class NonExactForm(ValueError):
    """A 2-form has a nonzero period, so it admits no global potential."""

    def __init__(self, which_period, value):
        super().__init__(f"period {which_period} = {value:.3e} is not zero")
        self.which_period = which_period
        self.value = value


class NotClosed(ValueError):
    def __init__(self, residual):
        super().__init__(f"form is not closed: |d beta|_inf = {residual:.3e}")
        self.residual = residual


class NonBorromean(ValueError):
    """Some pairwise linking number of a 3-component link is nonzero."""

    def __init__(self, pair, value):
        super().__init__(f"components {pair} have linking number {value:.4f}")
        self.pair = pair
        self.value = value


class PhiInconsistent(ValueError):
    """A caller supplied 3-form does not satisfy d(phi) = sum of omega wedges."""

    def __init__(self, point, residual):
        super().__init__(f"d(phi) mismatch {residual:.3e} at configuration {point}")
        self.point = point
        self.residual = residual


class GenericityError(RuntimeError):
    """No generic projection direction was found."""


class TubeError(ValueError):
    """A flux tube is not embedded or tubes overlap."""
