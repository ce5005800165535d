"""
Domain errors shared by every app.

They subclass ValueError (ConvergenceError also ArithmeticError) so callers that only
know the standard library can still catch them.
"""


class QSpecError(ValueError):
    """Base class for all quaternionic spectral errors."""


class QuaternionDomainError(QSpecError):
    pass


class DimensionMismatchError(QSpecError):
    pass


class MatrixFormatError(QSpecError):
    """Input file violates the matrix JSON grammar."""


class SymplecticStructureError(QSpecError):
    """A complex matrix is not the chi image of a quaternionic one."""


class NotHermitianError(QSpecError):
    pass


class NotPositiveError(QSpecError):
    pass


class NotNormalError(QSpecError):
    pass


class SpectrumPointError(QSpecError):
    """The pseudo-resolvent is numerically singular at the requested point."""


class ScalarFactorSingularError(QSpecError):
    pass


class InvalidSliceFunctionError(QSpecError):
    pass


class OverlappingSetsError(QSpecError):
    pass


class NotInvertibleError(QSpecError):
    pass


class UndefinedOnAtomError(QSpecError):
    pass


class InconsistentMeasureError(QSpecError):
    pass


class ApproximationError(QSpecError):
    pass


class ConvergenceError(QSpecError, ArithmeticError):
    pass


class ConfigurationError(QSpecError):
    """Invalid command-line options or settings."""
