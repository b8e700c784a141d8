"""Exception types shared across the package."""


class FhtrackError(Exception):
    """Base class for package errors."""


class ConfigError(FhtrackError):
    """Invalid or inconsistent experiment configuration."""


class ConvergenceError(FhtrackError):
    """An iterative solver failed to converge within its budget."""


class NormDriftError(FhtrackError):
    """Propagation lost more norm than the allowed drift budget."""


class ConstraintViolationError(FhtrackError):
    """A tracking feasibility constraint was violated.

    ``constraint`` is ``"amplitude"`` (the |X| < 1 - eps1 condition) or
    ``"hopping-floor"`` (the R > eps2 condition).  ``margin`` holds the
    violated quantity (1 - |X| or R); ``time`` is set when the violation
    occurs during propagation.
    """

    def __init__(self, constraint: str, margin: float, time: float | None = None):
        self.constraint = constraint
        self.margin = margin
        self.time = time
        where = f" at t = {time:.6g}" if time is not None else ""
        if constraint == "amplitude":
            msg = (f"tracking ratio too large{where}: margin 1 - |X| = {margin:.3e}; "
                   "the target current exceeds what the state can carry "
                   "(rescale the target or enlarge the lattice constant)")
        else:
            msg = (f"hopping expectation magnitude below floor{where}: R = {margin:.3e}; "
                   "the tracking field is undefined when the hopping expectation vanishes")
        super().__init__(msg)
