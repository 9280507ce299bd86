"""Exception types shared across the package."""


class ApdiffError(Exception):
    """Base class for all package-specific errors."""


class NonRealResult(ApdiffError):
    """A computation that must produce a real result left a complex residue."""


class CertificationFailed(ApdiffError):
    """A regularity certificate failed its own verification; this signals a bug."""


class BudgetExceeded(ApdiffError):
    """An enumeration or work budget was exceeded."""


class PreconditionFailed(ApdiffError):
    """A documented precondition does not hold for the given inputs."""

    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured


class BudgetExhausted(ApdiffError):
    """Rejection sampling ran out of attempts.

    ``diagnostics`` counts how often each acceptance condition failed.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class RetriesExhausted(ApdiffError):
    """Randomized rounding did not meet its deviation bounds within the retry budget.

    ``best`` holds the best attempt seen (set, density deviation, rho deviation).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
