"""Exception types shared across the package."""


class RemetricError(Exception):
    """Base class for package-specific failures."""


class HorizonExhausted(RemetricError):
    """A construction ran out of certified indices or levels.

    Carries enough context to tell the caller what would have been needed
    (e.g. the envelope value that the stop criterion was waiting for).
    """

    def __init__(self, message, needed=None):
        super().__init__(message)
        self.needed = needed


class TableBudgetExceeded(RemetricError):
    """Composition closure grew past the configured table budget."""

    def __init__(self, message, budget):
        super().__init__(message)
        self.budget = budget
