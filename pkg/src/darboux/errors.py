"""Exception hierarchy shared by all modules."""


class DarbouxError(Exception):
    """Base class for every error raised by the package."""


# jets
class DivisionBySingularJet(DarbouxError, ZeroDivisionError):
    pass


class DomainError(DarbouxError, ValueError):
    pass


class OrderExceeded(DarbouxError, IndexError):
    pass


# octonion / quadric
class NotIsotropic(DarbouxError, ValueError):
    pass


class ZeroElement(DarbouxError, ValueError):
    pass


class AmbiguousFamily(DarbouxError, ValueError):
    pass


class SameFamily(DarbouxError, ValueError):
    pass


class DegenerateInput(DarbouxError, ValueError):
    pass


class SingularMatrix(DarbouxError, ValueError):
    pass


# surfaces / triplets
class NotImmersion(DarbouxError, ValueError):
    pass


class NotIsometricDeformation(DarbouxError, ValueError):
    pass


class InconsistentSystem(DarbouxError, ValueError):
    pass


class TangentPlaneThroughOrigin(DarbouxError, ValueError):
    pass


class BothRoutesUnavailable(DarbouxError, ValueError):
    pass


class InconsistentRoutes(DarbouxError, ArithmeticError):
    pass


class WordError(DarbouxError):
    """A step of a word over {A, D} failed; carries the failing prefix."""

    def __init__(self, prefix, cause):
        self.prefix = prefix
        self.cause = cause
        super().__init__(f"word step failed after prefix {prefix!r}: {cause}")


# gauss / forms / incidence
class PolarUndefined(DarbouxError, ValueError):
    pass


class DegenerateSecondary(DarbouxError, ValueError):
    pass


class DirectionMismatch(DarbouxError, ArithmeticError):
    pass


class TableViolation(DarbouxError, AssertionError):
    pass


class ChartDegenerate(DarbouxError, ValueError):
    pass


class DegeneratePoint(DarbouxError, ValueError):
    pass


class UnknownPair(DarbouxError, KeyError):
    pass


class UnknownSuite(DarbouxError, KeyError):
    pass
