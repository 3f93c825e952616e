"""Exception types shared across the package."""


class HeatconeError(Exception):
    """Base class for all package errors."""


class InvalidParameter(HeatconeError, ValueError):
    """A constructor or operation received an out-of-contract argument."""


class NoPositiveEigenvalue(HeatconeError):
    """The discretized operator has no eigenvalue above the detection floor."""


class NonConvergence(HeatconeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""


class NonPositiveConstant(HeatconeError):
    """A quantity that must be positive came out <= 0 (inconsistent inputs)."""


class HandoverMismatch(HeatconeError):
    """Grid and far-field branches of the ground state disagree on the handover shell."""


class GridTooSmall(HeatconeError):
    """Evolved field leaks non-negligible mass to the spatial boundary."""


class NumericalFailure(HeatconeError):
    """NaN or infinity detected during time stepping."""


class OutOfRange(HeatconeError):
    """Query point lies outside the stored space-time coverage."""


class ThetaTooSmall(HeatconeError):
    """Scaled distance theta is below the convergence threshold of an integral."""


class KernelTooShort(HeatconeError):
    """Stored kernel snapshots do not reach the truncation horizon S_max."""


class OmegaTooSmall(HeatconeError):
    """Large parameter omega is too small for the analytic tail bound."""
