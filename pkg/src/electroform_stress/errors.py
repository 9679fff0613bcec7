"""Exception hierarchy.

Every input-validation failure derives from :class:`StressToolkitError`
(and ``ValueError``), so the CLI can map it to exit code 2.
"""

from __future__ import annotations


class StressToolkitError(ValueError):
    """Base class for validation and domain failures."""


class DomainError(StressToolkitError):
    pass


class NoDiffractionError(StressToolkitError):
    """n·λ ≥ 2d: no Bragg angle exists for this spacing."""


class ImplausibleStrainError(StressToolkitError):
    """|ε| beyond the elastic sanity bound; usually a wrong d0 or mis-indexed peak."""


class NoPeakError(StressToolkitError):
    pass


class EdgePeakError(NoPeakError):
    pass


class ConvergenceError(StressToolkitError):
    def __init__(self, message: str, params: dict, step_norm: float, iterations: int):
        super().__init__(message)
        self.params = params
        self.step_norm = step_norm
        self.iterations = iterations


class InsufficientDataError(StressToolkitError):
    pass


class MixedAzimuthError(StressToolkitError):
    pass


class MissingReferenceError(StressToolkitError):
    pass


class SingularDesignError(StressToolkitError):
    pass


class NoPairsError(StressToolkitError):
    pass


class ExtrapolationError(StressToolkitError):
    pass


class InconsistentCalibrationError(StressToolkitError):
    pass


class FormatError(StressToolkitError):
    """Malformed input file. Carries the source name and 1-based line number."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        super().__init__(str(self))

    def __str__(self) -> str:
        where = self.source or "<input>"
        if self.line is not None:
            where = f"{where}:{self.line}"
        return f"{where}: {self.message}"


class MissingMetadataError(FormatError):
    pass
