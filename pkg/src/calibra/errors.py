"""Exception hierarchy.

Every domain error derives from :class:`CalibraError` so the command line
front end can map them to exit status 1 and print the class name.
"""


class CalibraError(Exception):
    """Base class for all domain errors raised by calibra."""


# forms
class IndexOutOfRange(CalibraError, IndexError):
    pass


class RepeatedIndex(CalibraError, ValueError):
    pass


class AmbientMismatch(CalibraError, ValueError):
    pass


class DegreeZero(CalibraError, ValueError):
    pass


class ArityMismatch(CalibraError, ValueError):
    pass


class RankDeficient(CalibraError, ValueError):
    pass


class NotOrthonormal(CalibraError, ValueError):
    pass


# octonion / holonomy
class ConventionUnresolved(CalibraError, RuntimeError):
    pass


class DegreeMismatch(CalibraError, ValueError):
    pass


# planes
class DimMismatch(CalibraError, ValueError):
    pass


class NotHalfDim(CalibraError, ValueError):
    pass


class UnsupportedAmbient(CalibraError, ValueError):
    pass


# calibrate
class NotTransverse(CalibraError, ValueError):
    pass


class PolygonInfeasible(CalibraError, ValueError):
    pass


class ClosureFailed(CalibraError, RuntimeError):
    pass


class DegenerateAngle(CalibraError, ValueError):
    pass


class UnsupportedDim(CalibraError, ValueError):
    pass


# lawlor
class QuadratureFailure(CalibraError, RuntimeError):
    def __init__(self, message, achieved_error=None):
        super().__init__(message)
        self.achieved_error = achieved_error


class NoConvergence(CalibraError, RuntimeError):
    """Iteration budget exhausted.

    ``report`` carries whatever the solver had when it gave up (last iterate,
    best residual) so callers can inspect it.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class PreconditionError(CalibraError, ValueError):
    pass


# varmin / graphpde
class DegenerateMetric(CalibraError, ValueError):
    pass


class ShapeTooSmall(CalibraError, ValueError):
    pass


class ShapeMismatch(CalibraError, ValueError):
    pass


class ParseError(CalibraError, ValueError):
    pass
