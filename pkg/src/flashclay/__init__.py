"""Dynamic model of an electrically heated flash clay calcination plant.

The package provides thermodynamic property tables, reaction kinetics,
finite-volume calciner and lumped cyclone models, auxiliary gas-loop
units, a coupled plant DAE, an implicit DAE integrator with analytical
sparse Jacobians, and a scenario-driven command line interface.
"""

from .errors import (
    CouplingError,
    DataFileError,
    FlashClayError,
    InitializationError,
    ModelDomainError,
    SolverError,
)

__version__ = "0.1.0"

__all__ = [
    "FlashClayError",
    "DataFileError",
    "ModelDomainError",
    "CouplingError",
    "InitializationError",
    "SolverError",
    "__version__",
]
