"""Exception types raised by shadowfold."""


class ShadowfoldError(Exception):
    """Base class for all package errors."""


class ValidationError(ShadowfoldError, ValueError):
    """Malformed graph, point, or file input."""


class UndefinedAngleError(ShadowfoldError, ValueError):
    """An angle was requested at or toward the apex."""


class ExpRangeError(ShadowfoldError, ValueError):
    """Exponential map evaluated outside its flat validity region."""


class HypothesisError(ShadowfoldError, ValueError):
    """A check was invoked outside the regime where its claim applies."""
