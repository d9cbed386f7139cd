"""
Models Package
Numerical models of the fluctuation toolkit

This package contains the lattice discretization and every physical object built on it:
- Lattice, grid functions and two-point kernels
- Neumann scattering problem and the limiting correlation profile
- Condensate trajectories (cubic NLS and modified Hartree)
- Correlation kernels and their hyperbolic functions
- Quadratic generators and Bogoliubov propagation
- Truncated Fock space oracle
- Fluctuation vectors, covariance and Gaussian-side statistics
"""

from .base import (
    BogoFluctError,
    ConfigurationError,
    CondensateFlavor,
    InconclusiveVerdictError,
    PreconditionError,
    PropagationFailureError,
    Provenance,
    SingularCovarianceError,
    SolverFailureError,
    StructuralError,
    TimeSeries,
    log_slope,
)
from .grid import GridFunction, Kernel, Lattice
from .scattering import Potential, ScatteringSolution, scattering_length, solve_neumann_scattering
from .condensate import CondensateTrajectory, evolve_modified_hartree, evolve_nls, projector_q
from .kernels import FiniteNProfile, KernelBuilder, KernelFamily, LimitingProfile
from .bogoliubov import BogoliubovPair, QuadraticGenerator, TrajectoryGenerators, propagate
from .fock import FockSpace, OracleVerdict, verify_matched_instance
from .clt import CovarianceReport, Observable, covariance_matrix, fluctuation_report

__all__ = [
    # Errors and records
    "BogoFluctError",
    "ConfigurationError",
    "CondensateFlavor",
    "InconclusiveVerdictError",
    "PreconditionError",
    "PropagationFailureError",
    "Provenance",
    "SingularCovarianceError",
    "SolverFailureError",
    "StructuralError",
    "TimeSeries",
    "log_slope",

    # Lattice
    "GridFunction",
    "Kernel",
    "Lattice",

    # Physics
    "Potential",
    "ScatteringSolution",
    "scattering_length",
    "solve_neumann_scattering",
    "CondensateTrajectory",
    "evolve_modified_hartree",
    "evolve_nls",
    "projector_q",
    "FiniteNProfile",
    "KernelBuilder",
    "KernelFamily",
    "LimitingProfile",
    "BogoliubovPair",
    "QuadraticGenerator",
    "TrajectoryGenerators",
    "propagate",
    "FockSpace",
    "OracleVerdict",
    "verify_matched_instance",
    "CovarianceReport",
    "Observable",
    "covariance_matrix",
    "fluctuation_report",
]
