"""Exception types shared across the package."""


class MorbitError(Exception):
    """Base class for all package-specific errors."""


class PotentialFormatError(MorbitError):
    """Potential configuration document is malformed or has unknown fields."""


class ValidationError(MorbitError):
    """A parameter or data structure violates its contract."""


class IntegrationError(MorbitError):
    """Non-finite state encountered during time integration."""


class SymplecticityError(MorbitError):
    """A fundamental-solution matrix is too far from det = 1."""


class DegenerateOperatorError(MorbitError):
    """An operator has an eigenvalue too close to zero for index counting.

    For twisted operators this tags the twist as a Floquet multiplier;
    callers that sweep over twists catch this and perturb the angle.
    """

    def __init__(self, message, sigma=None):
        super().__init__(message)
        self.sigma = sigma


class ConsistencyError(MorbitError):
    """Two independent computations of the same quantity disagree.

    Usually a sign that the discretization is too coarse; carries both
    values so the caller can report them.
    """

    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values
