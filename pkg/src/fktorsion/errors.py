"""Exception types raised by the public API.

Validation failures and numerical non-convergence get distinct classes so the
CLI can map them to exit codes (2 and 3 respectively).
"""


class TorsionError(Exception):
    """Base class for all library errors."""


class ValidationError(TorsionError):
    """Bad input: shape, domain, or consistency violations."""


class ConvergenceError(TorsionError):
    """A numerical procedure failed to reach its tolerance."""


class EmptyFactorList(ValidationError):
    pass


class NonNormalizedTrace(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class AlgebraMismatch(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotAProjection(ValidationError):
    pass


class NotSelfAdjoint(ValidationError):
    pass


class NotPositive(ValidationError):
    pass


class NotInvertible(ValidationError):
    pass


class Singular(ValidationError):
    pass


class PathNotAtIdentity(ValidationError):
    pass


class SingularSample(ValidationError):
    pass


class NotExact(ValidationError):
    pass


class SingularGenerator(ValidationError):
    pass


class MalformedWord(ValidationError):
    pass


class GeneratorCountMismatch(ValidationError):
    pass


class DegreeOutOfRange(ValidationError):
    pass


class MissingDerivative(ValidationError):
    pass


class StepTooLarge(ValidationError):
    pass


class NonpositiveTime(ValidationError):
    pass


class ShiftedSpectrumNonpositive(ValidationError):
    pass


class NonConstantBetti(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class NotAntisymmetric(ValidationError):
    pass


class ZeroTorsion(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class QuadratureNotConverged(ConvergenceError):
    pass


class EigensolverNotConverged(ConvergenceError):
    pass
