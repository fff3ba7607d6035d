"""Exceptions raised by the evcbounds modules."""


class EvcError(Exception):
    """Base class for every error raised by this package."""


class DomainError(EvcError, ValueError):
    pass


class ParameterOutOfRange(EvcError, ValueError):
    """Family parameters violate the admissible range of their tag."""


class InvalidPickands(EvcError, ValueError):
    """
    A knot list or JSON document does not describe a Pickands function.

    Attributes:
        diagnostic: The first violated invariant, as reported by is_valid
        knot_index: Index of the offending knot, if there is one
    """

    def __init__(self, diagnostic, knot_index=None):
        super().__init__(diagnostic)
        self.diagnostic = diagnostic
        self.knot_index = knot_index


class NoClosedForm(EvcError, NotImplementedError):
    pass


class ToleranceNotReached(EvcError, RuntimeError):
    pass


class NoSignChange(EvcError, ValueError):
    pass


class MeasureDisagreement(EvcError, RuntimeError):
    """Exact and quadrature evaluations of a measure disagree beyond 1e-8."""


class PointOutsideRegion(EvcError, ValueError):
    pass


class UnattainablePoint(PointOutsideRegion):
    """Point lies inside the band at v = 0, where only A = 1 attains the value."""


class WitnessNotFound(EvcError, RuntimeError):
    pass
