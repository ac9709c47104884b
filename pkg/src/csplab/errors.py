"""Exception types shared across the package."""


class CspLabError(Exception):
    """Base class for all package-specific failures."""


class InvalidData(CspLabError):
    """Input samples are malformed (non-finite, wrong shape, ...)."""


class GridTooSmall(CspLabError):
    """A grid or lattice has too few points for the requested operation."""


class DecayViolation(CspLabError):
    """Profile does not decay enough at the grid edges for whole-line formulas."""


class IntegrationBlowup(CspLabError):
    """ODE march produced a non-finite state."""


class SingularSpectralPoint(CspLabError):
    """k = 0 requested from a solver that is singular there."""


class SpectralSingularity(CspLabError):
    """|a(k)| fell below tolerance on the real line."""


class ToleranceExceeded(CspLabError):
    """A solution-quality identity failed beyond the allowed defect."""

    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class InvalidSpectrum(CspLabError):
    """Discrete-spectrum data violates its constraints (Im k <= 0, duplicates, C = 0)."""


class DegenerateConfiguration(CspLabError):
    """The reflectionless linear system is singular at the requested point."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class NotSingleValued(CspLabError):
    """x(y) is not monotone, so the field cannot be sampled on an x grid."""


class OnCut(CspLabError):
    """Evaluation point lies on the jump interval of a Cauchy integral."""


class InsufficientTable(CspLabError):
    """Scattering table does not cover or resolve the requested interval."""


class PoleAtZero(CspLabError):
    """Gamma-function phase requested at its pole."""


class WrongSector(CspLabError):
    """(x, t) lies outside the sector the formula is valid in."""


class Blowup(CspLabError):
    """Time integration produced NaN/overflow."""

    def __init__(self, t):
        super().__init__(f"evolution blew up at t = {t:.6g}")
        self.t = t


class MeanNotZero(CspLabError):
    """Initial data has nonzero spatial mean, incompatible with the flow."""


class WindowEmpty(CspLabError):
    """Requested space-time window contains no lattice points."""


class ConfigError(CspLabError):
    """Run configuration failed schema validation."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
