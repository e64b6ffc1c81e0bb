"""Exception types shared across the toolkit."""


class ShapeError(ValueError):
    """An input has the wrong length or dimensions."""


class InvalidStateError(ValueError):
    """A quantum-state object violates its structural contract."""


class InvalidGateError(ValueError):
    """A gate matrix is not unitary (outside the imaginary-time path)."""


class EdgeNotFoundError(KeyError):
    """The requested edge does not exist in the network."""


class FrameOptimizationError(RuntimeError):
    """Frame construction failed to converge.

    Carries the best frame found so far in ``best_frame``.
    """

    def __init__(self, message, best_frame=None):
        super().__init__(message)
        self.best_frame = best_frame
