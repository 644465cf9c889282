"""Exception and warning types shared across the package."""


class ChiralSqueezeError(Exception):
    """Base class for all package errors."""


class InvalidParameters(ChiralSqueezeError):
    """Raised by :func:`chiralsqueeze.model.validate` with the full issue list."""

    def __init__(self, issues):
        self.issues = list(issues)
        lines = "; ".join(f"{i.code}({i.field}): {i.message}" for i in self.issues)
        super().__init__(lines)


class ConfigError(ChiralSqueezeError):
    """Malformed configuration file or field."""


class OrderOutOfRange(ChiralSqueezeError, ValueError):
    pass


class ArgumentOutOfRange(ChiralSqueezeError, ValueError):
    pass


class NegativeDriveFrequency(ChiralSqueezeError, ValueError):
    pass


class DegenerateDrive(ChiralSqueezeError, ValueError):
    pass


class UnstableRegime(ChiralSqueezeError):
    """|epsilon| >= 1 or the drift has an eigenvalue with non-negative real part."""


class NonIdealChirality(ChiralSqueezeError, ValueError):
    pass


class NonPositiveSpectrum(ChiralSqueezeError, ValueError):
    pass


class SingularSystem(ChiralSqueezeError):
    pass


class UnstableDrift(ChiralSqueezeError):
    pass


class NonPhysicalInitialState(ChiralSqueezeError, ValueError):
    pass


class StepSizeUnderflow(ChiralSqueezeError):
    pass


class RwaMarginal(UserWarning):
    """Coupling is not small compared to the drive and mode frequencies."""


class DetunedSideband(UserWarning):
    """Drive tones do not sit exactly on the red/blue sidebands."""


class UnstableRegimeWarning(UserWarning):
    pass


class IncommensurateDrive(UserWarning):
    """No common period found; steady state averaged over a finite window."""
