"""Shared exception types."""


class BudgetExceededError(RuntimeError):
    """A configured state/node budget was exhausted before completion."""


class InfeasibleError(RuntimeError):
    """No accepting lasso exists in the searched product."""


class CoverageError(RuntimeError):
    """Command-node placement fails the coverage condition."""

    def __init__(self, message: str, uncovered=()):
        super().__init__(message)
        self.uncovered = list(uncovered)


class StitchHorizonError(RuntimeError):
    """The stitched schedule did not close into a lasso within the horizon."""
