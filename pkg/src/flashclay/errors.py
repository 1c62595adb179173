"""Exception hierarchy shared across the package."""


class FlashClayError(Exception):
    """Base class for all package-specific errors."""


class DataFileError(FlashClayError):
    """A property-data or scenario file is malformed."""


class ModelDomainError(FlashClayError):
    """A model correlation was evaluated outside its physical domain."""


class CouplingError(FlashClayError):
    """Inter-unit coupling is degenerate (e.g. vanishing interface flow)."""


class InitializationError(FlashClayError):
    """Consistent initialization of the algebraic variables failed."""


class SolverError(FlashClayError):
    """Time integration or steady-state solution failed."""
