"""Digital dynamical-decoupling toolkit.

Subpackages:

* :mod:`ddkit.walsh` -- Walsh functions in Paley ordering, switching functions.
* :mod:`ddkit.sequence` -- projection strings, Paley triples, pulse schedules.
* :mod:`ddkit.bounds` -- analytic error-per-gate bounds.
* :mod:`ddkit.dynamics` -- exact spin-bath simulation and error actions.
* :mod:`ddkit.experiments` -- seeded ensemble scans and persistence.
* :mod:`ddkit.cli` -- the ``ddkit`` command.
"""

from . import bounds, dynamics, experiments, sequence, walsh
from .errors import (
    ConfigError,
    ConstraintViolation,
    DDKitError,
    DegenerateDraw,
    PrincipalBranchError,
    RegimeError,
    UnsupportedOrder,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConstraintViolation",
    "DDKitError",
    "DegenerateDraw",
    "PrincipalBranchError",
    "RegimeError",
    "UnsupportedOrder",
    "bounds",
    "dynamics",
    "experiments",
    "sequence",
    "walsh",
]
