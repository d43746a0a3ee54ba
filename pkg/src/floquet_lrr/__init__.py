"""Floquet-Bloch analysis and Riemann-Roch style dimension bookkeeping for
periodic lattice operators."""
from .errors import (ConfigError, FermiSurfaceNotFiniteError, FloquetLRRError, InstabilityError,
                     RankUnstableError)
from .lattice import (HoppingTerm, LatticeFunction, LatticePoint, PeriodicLatticeOperator, apply,
                      transpose, weight)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "FermiSurfaceNotFiniteError", "FloquetLRRError", "InstabilityError",
    "RankUnstableError", "HoppingTerm", "LatticeFunction", "LatticePoint", "PeriodicLatticeOperator",
    "apply", "transpose", "weight",
]
