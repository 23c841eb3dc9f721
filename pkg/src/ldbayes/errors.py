"""Exception types shared across the library."""


class LdbayesError(Exception):
    """Base class for all library-specific errors."""


class NonErgodic(LdbayesError):
    """The chain is reducible or periodic; no unique stationary law exists."""


class InsufficientLength(LdbayesError):
    """A path or horizon is too short for the requested computation."""


class ShapeMismatch(LdbayesError):
    """Two measures or tables do not share depth or alphabet."""


class TooLarge(LdbayesError):
    """A state-space or enumeration guard was exceeded."""


class InsufficientSamples(LdbayesError):
    """A Monte Carlo estimator needs at least two samples."""


class RangeViolation(LdbayesError):
    """Drift difference leaves the range of the diffusion matrix."""


class EmptyFamily(LdbayesError):
    """A family-level operation received no members."""


class DepthTooSmall(LdbayesError):
    """Block depth below the minimum required by the operation."""


class Infeasible(LdbayesError):
    """The constraint polytope of a convex program is empty or disconnected."""


class SolverStall(LdbayesError):
    """An iterative solver failed to reach its convergence target."""


class Diverged(LdbayesError):
    """A simulated trajectory left the finite range.

    Attributes
    ----------
    step : int
        Index of the first non-finite state.
    """

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class InvalidParameter(LdbayesError):
    """A scalar parameter is outside its admissible range."""


class EmptyNeighborhood(LdbayesError):
    """The requested neighborhood contains no grid point."""


class ConfigError(LdbayesError):
    """A runtime configuration problem, tagged with its JSON path.

    Attributes
    ----------
    path : str
        Dotted JSON path of the offending field.
    """

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
