"""Exception hierarchy. Each class maps to one failure mode of the library."""


class HalflineWalkError(Exception):
    """Base class for library errors."""


class DistributionError(HalflineWalkError):
    """Problems with an increment distribution."""


class MalformedDistribution(DistributionError):
    pass


class NotNormalized(DistributionError):
    pass


class DivergentMoment(DistributionError):
    pass


class OutOfRange(HalflineWalkError, ValueError):
    pass


class NumericFailure(HalflineWalkError):
    """Base for numerical routines that could not reach their tolerance."""


class FitDegenerate(NumericFailure):
    pass


class InsufficientData(NumericFailure):
    pass


class DegenerateK(NumericFailure):
    pass


class NotPositiveDefinite(NumericFailure):
    pass


class QuadratureNonConvergent(NumericFailure):
    pass


class SeriesNotConverged(NumericFailure):
    pass


class TruncationNotConverged(NumericFailure):
    pass


class KernelNotConverged(NumericFailure):
    pass


class HorizonTooShort(NumericFailure):
    pass


class SupportUnbounded(HalflineWalkError):
    pass


class ConfigError(HalflineWalkError):
    pass
