"""Exception and warning classes used across the package."""


class QAdditiveError(ValueError):
    """Base class for validation-type failures (CLI exit code 2)."""


class SpectrumError(QAdditiveError):
    """Root finding for the characteristic polynomial did not converge.

    ``residuals`` holds the backward error of every returned root.
    """

    def __init__(self, message, residuals=()):
        super().__init__(message)
        self.residuals = tuple(residuals)


class IllConditionedError(QAdditiveError):
    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition


class ImaginaryResidueError(QAdditiveError):
    def __init__(self, message, residue):
        super().__init__(message)
        self.residue = residue


class NearDegenerateError(QAdditiveError):
    """Exponents too close for a distinct-root formula; use the confluent path."""


class RankDeficiencyError(QAdditiveError):
    def __init__(self, message, rank, singular_values=()):
        super().__init__(message)
        self.rank = rank
        self.singular_values = tuple(singular_values)


class FitConvergenceError(QAdditiveError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DatasetError(QAdditiveError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FeasibilityWarning(UserWarning):
    """A model violates a necessary condition of its scaling hypothesis."""


class DataWarning(UserWarning):
    pass
