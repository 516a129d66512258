"""Exception types shared across the package."""


class ParameterDomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class ShapeError(ValueError):
    """Series and weight vector lengths disagree."""


class NumericError(ArithmeticError):
    """A computation produced a non-finite or otherwise unusable value."""


class DegenerateWeights(NumericError):
    """All multinomial counts equal one, so every centered weight vanishes."""


class NonpositiveStudentizer(NumericError):
    """The variance estimate under a square root is zero or negative."""
