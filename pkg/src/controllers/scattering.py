"""
Scattering Controller
Solves the Neumann scattering problem over the configured particle numbers and reports
λ_N, the scattering length and the distance of N·ω_N to the limiting profile
"""

from typing import Any, Dict, List, Optional

from loguru import logger

from .base import BaseController
from .report import ReportController
from models.scattering import (
    Potential, ScatteringSolution, eigenvalue_identity_residual, limiting_n_lambda,
    solve_neumann_scattering, sup_error_vs_limit
)
from utils import timed_stage
from utils.validation import defect_check

SCATTERING_COLUMNS = ["N", "beta", "ell", "lambda_N", "N_lambda_N", "a0", "sup_err_Nomega_vs_omegainf"]
IDENTITY_TOLERANCE = 1e-8


class ScatteringController(BaseController):
    """Controller for the Neumann scattering stage"""

    stage = "scattering"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._solutions: Dict[float, ScatteringSolution] = {}
        self.summary: Dict[str, Any] = {}

    def potential(self, n_particles: Optional[float] = None) -> Potential:
        config = self.settings.potential
        return Potential(
            profile=config.profile,
            amplitude=config.amplitude,
            support_radius=config.support_radius,
            beta=config.beta,
            n_particles=n_particles if n_particles is not None else config.n_particles,
        )

    @property
    def ell(self) -> float:
        return self.settings.ell

    @property
    def sup_delta(self) -> float:
        delta = self.settings.scattering.sup_delta
        return delta if delta is not None else self.ell / 10.0

    def particle_numbers(self) -> List[float]:
        sweep = list(self.settings.potential.n_sweep)
        return sweep if sweep else [self.settings.potential.n_particles]

    def solution_for(self, n_particles: float) -> ScatteringSolution:
        """Neumann solution at N, solved once per N"""
        if n_particles not in self._solutions:
            self._solutions[n_particles] = solve_neumann_scattering(
                self.potential(n_particles), self.ell, self.settings.scattering.radial_points
            )
        return self._solutions[n_particles]

    def row_for(self, solution: ScatteringSolution) -> List[float]:
        pot = solution.potential
        sup_err = sup_error_vs_limit(solution, self.sup_delta, self.settings.scattering.omega_variant)
        return [pot.n_particles, pot.beta, solution.ell, solution.eigenvalue, solution.n_lambda,
                solution.scattering_length, sup_err]

    @timed_stage("scattering")
    def run(self, write: bool = True) -> List[List[float]]:
        """
        Solve every configured particle number and write scattering.csv

        Returns:
            List of CSV rows in SCATTERING_COLUMNS order
        """
        return self.execute_stage(self._run, write)

    def _run(self, write: bool) -> List[List[float]]:
        rows = []
        residuals = []
        for n in self.particle_numbers():
            solution = self.solution_for(n)
            residual = eigenvalue_identity_residual(solution)
            residuals.append(residual)
            self.merge_validation(defect_check(f"eigenvalue_identity_residual[N={n:g}]", residual,
                                               IDENTITY_TOLERANCE))
            rows.append(self.row_for(solution))

        b0 = self.potential().b0
        limit = limiting_n_lambda(b0, self.ell)
        self.summary = {
            'b0': b0,
            'ell': self.ell,
            'limiting_N_lambda': limit,
            'max_identity_residual': max(residuals),
            'omega_variant': self.settings.scattering.omega_variant,
            'sup_delta': self.sup_delta,
        }
        if limit > 0:
            self.summary['relative_gap_at_largest_N'] = abs(rows[-1][4] - limit) / limit
        logger.info(f"Scattering stage: {len(rows)} particle numbers, limit N*lambda = {limit:.8g}")

        if write:
            ReportController(self.settings, self.resources).write_csv("scattering", SCATTERING_COLUMNS, rows)
        return rows
