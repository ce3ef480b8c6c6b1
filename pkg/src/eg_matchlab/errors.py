"""Error types shared across the package.

Exit-code mapping used by the CLI: InputError -> 2, CapabilityError -> 3.
"""


class InputError(ValueError):
    """Malformed or out-of-contract input (bad vertex, overlapping sets, ...)."""


class CapabilityError(RuntimeError):
    """Instance exceeds a configured exact-mode limit or node budget.

    When a branch-and-bound search gives up, the best bounds found so far
    are attached as ``lower`` / ``upper`` (either may be None).
    """

    def __init__(self, message, lower=None, upper=None):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


class MoveError(InputError):
    """A transformation was applied to a decomposition its guard rejects."""
