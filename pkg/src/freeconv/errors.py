"""Exception hierarchy.

Everything raised on purpose derives from :class:`FreeConvError`.  The two
intermediate classes split the failures the CLI reports with different exit
codes: bad input (:class:`ValidationError`) versus a numerical routine that
did not reach its target (:class:`SolverError`).
"""


class FreeConvError(Exception):
    pass


class ValidationError(FreeConvError, ValueError):
    pass


class SolverError(FreeConvError, ArithmeticError):
    pass


# measure construction
class NonUnitMass(ValidationError):
    pass


class InvalidSupport(ValidationError):
    pass


class DuplicatePosition(ValidationError):
    pass


class BadParameters(ValidationError):
    pass


class SupportViolation(ValidationError):
    pass


class DomainMismatch(ValidationError):
    pass


# transforms
class NotSelfMap(ValidationError):
    pass


class InversionDiverged(SolverError):
    """Raised when a point lies outside the region where a transform can be inverted."""


class OutsideInversionInterval(ValidationError):
    pass


# fixed points
class MaxIterations(SolverError):
    pass


class NotAdmissible(ValidationError):
    pass


class SolverFailure(SolverError):
    pass


# oracles, semigroups
class BadWeights(ValidationError):
    pass


class BadExponent(ValidationError):
    pass


class ZeroFirstMoment(ValidationError):
    pass


class ZeroOfEta(ValidationError):
    pass


class DeltaZero(ValidationError):
    pass


class NotBooleanInfDiv(ValidationError):
    pass


# abel / recovery
class NonConvergent(SolverError):
    pass


class OscillatoryLimit(SolverError):
    pass
