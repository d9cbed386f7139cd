"""
Base Model Types
Provides the exception hierarchy, provenance tags and small record helpers shared by
all numerical models of the fluctuation toolkit
"""

from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from loguru import logger


class BogoFluctError(Exception):
    """Base class for all toolkit errors"""

    exit_code: int = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error': self.__class__.__name__,
            'message': self.message,
            'details': self.details,
            'exit_code': self.exit_code,
        }


class ConfigurationError(BogoFluctError):
    """Invalid, unknown or out-of-range configuration"""
    exit_code = 2


class PreconditionError(BogoFluctError):
    """An operation was called outside its domain"""
    exit_code = 3


class SolverFailureError(BogoFluctError):
    """A root finder or ODE integrator did not converge"""
    exit_code = 4


class InconclusiveVerdictError(BogoFluctError):
    """Fock oracle leakage too large for a verdict"""
    exit_code = 5


class PropagationFailureError(BogoFluctError):
    """Bogoliubov propagation lost the symplectic structure"""
    exit_code = 6


class StructuralError(BogoFluctError):
    """Mismatched lattices, shapes, times or missing members"""
    exit_code = 7


class SingularCovarianceError(BogoFluctError):
    """Gaussian density requested for a singular covariance matrix"""
    exit_code = 8


class Provenance(Enum):
    """Origin of a kernel family or condensate trajectory"""
    LIMITING = "limiting"
    FINITE_N = "finite-N"


class CondensateFlavor(Enum):
    """Effective one-body equation used for the condensate"""
    NLS = "limiting-NLS"
    MODIFIED_HARTREE = "modified-Hartree"


class TimeSeries:
    """
    Column-oriented record of scalar diagnostics sampled along a run.

    Rows are appended as dicts; every row must carry the same keys in the same order.
    """

    def __init__(self, columns: List[str]):
        self.columns = list(columns)
        self._rows: List[List[float]] = []

    def append(self, **values: float) -> None:
        if list(values.keys()) != self.columns:
            raise StructuralError(
                f"Row keys {list(values.keys())} do not match columns {self.columns}"
            )
        self._rows.append([float(values[c]) for c in self.columns])

    def column(self, name: str) -> np.ndarray:
        index = self.columns.index(name)
        return np.array([row[index] for row in self._rows])

    def rows(self) -> List[List[float]]:
        return [list(row) for row in self._rows]

    def last(self) -> Dict[str, float]:
        if not self._rows:
            return {}
        return dict(zip(self.columns, self._rows[-1]))

    def __len__(self) -> int:
        return len(self._rows)

    def __repr__(self) -> str:
        return f"<TimeSeries(columns={self.columns}, rows={len(self._rows)})>"


def log_slope(xs: np.ndarray, ys: np.ndarray) -> float:
    """Least-squares slope of log(ys) against log(xs)"""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise PreconditionError("log-log regression needs positive data")
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    logger.debug(f"log-log slope over {len(xs)} points: {slope:.4f}")
    return float(slope)
