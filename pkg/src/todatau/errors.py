"""Exception and warning types shared by all modules."""


class TodaError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(TodaError):
    """Invalid run configuration."""


class DomainError(TodaError):
    """Contour or annulus parameters are inconsistent."""


class NumericalError(TodaError):
    """Base for failures of the numerical pipeline (CLI exit code 3)."""


class EvalTooClose(NumericalError):
    """Evaluation point is within one grid spacing of the contour."""


class PoleHit(NumericalError):
    """A group element has a zero or pole on or too close to the contour."""


class CertFail(NumericalError):
    """A symbol failed the membership checks of the symbol group."""


class NotInvertible(NumericalError):
    """The truncated Toeplitz matrix is numerically singular."""


class NonPositiveTau(NumericalError):
    """A tau value that must be positive is not."""

    def __init__(self, message, n=None):
        super().__init__(message)
        self.n = n


class DivByZero(NumericalError):
    """A denominator in an m-function formula vanished."""


class NearSpectrum(NumericalError):
    """Weyl function requested too close to the spectral interval."""


class Degenerate(NumericalError):
    """The Weyl solution vanishes at the reference site."""


class ValidationFail(NumericalError):
    """An m-function violates one of the class conditions."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class SpectrumViolation(NumericalError):
    """Flow output has spectrum outside the admissible interval."""


class StepTooLarge(NumericalError):
    """Richardson check of the lattice integrator failed."""


class PositivityLoss(NumericalError):
    """An off-diagonal coefficient became non-positive during integration."""


class VerificationFailure(TodaError):
    """A verification verdict failed (CLI exit code 4)."""


class TruncationWarning(UserWarning):
    """Laurent coefficients have significant energy at the truncation edge."""
