"""Exception hierarchy for hhllab.

Every error raised by the library derives from :class:`HHLLabError`, and most
also derive from :class:`ValueError` so callers that only care about bad input
can catch that.
"""


class HHLLabError(Exception):
    """Base class for all library errors."""


# linear algebra
class NonHermitianInput(HHLLabError, ValueError):
    pass


class NonSquareInput(HHLLabError, ValueError):
    pass


class NoConvergence(HHLLabError, RuntimeError):
    pass


class SingularMatrix(HHLLabError, ValueError):
    pass


class NotPositiveDefinite(HHLLabError, ValueError):
    pass


class MaxIterationsExceeded(HHLLabError, RuntimeError):
    pass


class DimensionMismatch(HHLLabError, ValueError):
    pass


# circuits
class IndexOutOfRange(HHLLabError, IndexError):
    pass


class ArityMismatch(HHLLabError, ValueError):
    pass


class DuplicateTarget(HHLLabError, ValueError):
    pass


class NonUnitaryMatrix(HHLLabError, ValueError):
    pass


class ContainsMeasurement(HHLLabError, ValueError):
    pass


class TooLarge(HHLLabError, ValueError):
    pass


# simulation
class EmptyMeasurementSet(HHLLabError, ValueError):
    pass


class ZeroProbabilityBranch(HHLLabError, ValueError):
    pass


class SpecInconsistent(HHLLabError, ValueError):
    pass


# HHL pipeline
class ZeroRHS(HHLLabError, ValueError):
    pass


class NotNormalized(HHLLabError, ValueError):
    pass


class NotPowerOfTwo(HHLLabError, ValueError):
    pass


class InvalidC(HHLLabError, ValueError):
    pass


class PostselectionFailed(HHLLabError, RuntimeError):
    pass


# noise / benchmarks
class UnphysicalModel(HHLLabError, ValueError):
    pass


class InvalidParameter(HHLLabError, ValueError):
    pass
