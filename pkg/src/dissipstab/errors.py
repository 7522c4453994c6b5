class DissipStabError(Exception):
    """Base class of all errors raised by dissipstab."""


class NonConvergence(DissipStabError):
    """An iterative kernel hit its iteration cap.

    Attributes:
        best: the best iterate available when the iteration stopped.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateInput(DissipStabError):
    pass


class DimensionMismatch(DissipStabError):
    pass


class NotPositiveDefinite(DissipStabError):
    pass


class NotHermitian(DissipStabError):
    pass


class NegativeRadicand(DissipStabError):
    pass


class NonPositiveA4(DissipStabError):
    pass


class NegativeWRadicand(DissipStabError):
    pass


class NoRealCriticalPoint(DissipStabError):
    pass


class InvalidConstraint(DissipStabError):
    pass


class NoOnsetFound(DissipStabError):
    pass


class BracketFailure(DissipStabError):
    pass


class MissingRadiativeCoefficients(DissipStabError):
    pass


class SingularA(DissipStabError):
    pass


class OverdampedWindowClosed(DissipStabError):
    pass


class ConfigError(DissipStabError):
    pass


class SweepGuardExceeded(DissipStabError):
    pass
