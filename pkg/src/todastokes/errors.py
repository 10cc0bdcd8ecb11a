"""Exception types raised by the numerical routines."""


class TodaStokesError(Exception):
    """Base class for all package errors."""


class UnderResolved(TodaStokesError):
    """A product or quotient leaked mass past the truncation window."""


class ConditionViolation(TodaStokesError):
    """A point fails one of the admissibility conditions."""


class T1Violation(ConditionViolation):
    pass


class T2Violation(ConditionViolation):
    pass


class BoundaryRoot(TodaStokesError):
    """A critical point sits on (or numerically at) the unit circle."""


class DegenerateCritical(TodaStokesError):
    pass


class SolvabilityFailure(TodaStokesError):
    pass


class StepTooLarge(TodaStokesError):
    pass


class QuadratureNotConverged(TodaStokesError):
    pass


class DegenerateSaddle(TodaStokesError):
    pass


class BranchAmbiguity(TodaStokesError):
    pass


class AntiStokesDirection(TodaStokesError):
    pass


class OverlapMismatch(TodaStokesError):
    pass


class ParameterOutOfScope(TodaStokesError):
    pass


class StokesRay(TodaStokesError):
    pass


class OutOfSector(TodaStokesError):
    pass


class RankDeficient(TodaStokesError):
    pass


class IllConditioned(TodaStokesError):
    pass


class ConfigInvalid(TodaStokesError):
    pass


class MissingSeries(TodaStokesError):
    pass
