"""
Condensate Controller
Builds the initial state, evolves the condensate and, for particle sweeps, measures the
distance of the modified Hartree trajectories to the limiting NLS trajectory
"""

from typing import Any, Dict, List, Optional

import numpy as np
from loguru import logger

from .base import BaseController
from .report import ReportController
from .scattering import ScatteringController
from models.base import TimeSeries, log_slope
from models.condensate import (
    CondensateTrajectory, distance_to_limit, evolve_modified_hartree, evolve_nls,
    gaussian_initial_state
)
from models.grid import GridFunction, Lattice
from utils import timed_stage
from utils.validation import defect_check, resolution_check

CONDENSATE_COLUMNS = ["t", "mass", "energy", "Linf_norm"]
SWEEP_COLUMNS = ["N", "distance_to_limit"]
MASS_TOLERANCE = 1e-9


class CondensateController(BaseController):
    """Controller for the condensate stage"""

    stage = "condensate"

    def __init__(self, *args, scattering: Optional[ScatteringController] = None, **kwargs):
        super().__init__(*args, **kwargs)
        self.scattering = scattering or ScatteringController(self.settings, self.resources)
        self.trajectory: Optional[CondensateTrajectory] = None
        self.summary: Dict[str, Any] = {}

    def lattice(self) -> Lattice:
        config = self.settings.lattice
        return Lattice(config.d, config.m_axis, config.length)

    def initial_state(self, lattice: Optional[Lattice] = None) -> GridFunction:
        lattice = lattice or self.lattice()
        config = self.settings.condensate
        if config.initial == "plane_wave":
            mode = int(config.momentum)
            k = 2.0 * np.pi * mode / lattice.length
            values = np.exp(1j * k * lattice.coordinates()[:, 0])
            return GridFunction(lattice, values).normalized()
        return gaussian_initial_state(lattice, config.width, config.center, config.momentum)

    def coupling(self) -> float:
        sigma = self.settings.condensate.sigma
        return sigma if sigma is not None else self.scattering.potential().b0

    def limiting_trajectory(self, phi0: GridFunction) -> CondensateTrajectory:
        config = self.settings.condensate
        return evolve_nls(phi0, self.coupling(), config.t_final, config.dt, config.sigma_mode)

    def hartree_trajectory(self, phi0: GridFunction, n_particles: float) -> CondensateTrajectory:
        config = self.settings.condensate
        solution = self.scattering.solution_for(n_particles)
        self.merge_validation(resolution_check(solution.potential.scaled_support, phi0.lattice.spacing))
        return evolve_modified_hartree(phi0, solution.potential, solution, config.t_final, config.dt)

    def history(self, trajectory: CondensateTrajectory) -> TimeSeries:
        series = TimeSeries(CONDENSATE_COLUMNS)
        mass = trajectory.mass_history()
        energy = trajectory.energy_history()
        linf = trajectory.linf_history()
        for n, t in enumerate(trajectory.times):
            series.append(t=t, mass=mass[n], energy=energy[n], Linf_norm=linf[n])
        return series

    @timed_stage("condensate")
    def run(self, write: bool = True) -> CondensateTrajectory:
        """
        Evolve the configured flavor and write condensate.csv (and the sweep table)

        Returns:
            CondensateTrajectory: the trajectory driving the fluctuation dynamics
        """
        return self.execute_stage(self._run, write)

    def _run(self, write: bool) -> CondensateTrajectory:
        config = self.settings.condensate
        phi0 = self.initial_state()
        limit = None
        if config.flavor == "hartree":
            trajectory = self.hartree_trajectory(phi0, self.settings.potential.n_particles)
        else:
            trajectory = limit = self.limiting_trajectory(phi0)

        drift = trajectory.max_mass_drift()
        self.merge_validation(defect_check("mass_drift", drift, MASS_TOLERANCE))
        series = self.history(trajectory)
        energy = series.column("energy")
        self.summary = {
            'flavor': trajectory.flavor.value,
            'steps': trajectory.steps,
            'dt': trajectory.dt,
            'sigma': trajectory.sigma,
            'mass_drift': drift,
            'time_reversal_defect': trajectory.time_reversal_defect(),
            'energy_drift': float(np.max(np.abs(energy - energy[0]))),
            'max_Linf_norm': float(np.max(series.column("Linf_norm"))),
        }
        report = ReportController(self.settings, self.resources) if write else None
        if report is not None:
            report.write_time_series("condensate", series)

        if self.settings.potential.n_sweep:
            if limit is None:
                limit = self.limiting_trajectory(phi0)
            rows = self.sweep(phi0, limit)
            if report is not None:
                report.write_csv("condensate_sweep", SWEEP_COLUMNS, rows)

        self.trajectory = trajectory
        logger.info(f"Condensate stage: {trajectory}")
        return trajectory

    def sweep(self, phi0: GridFunction, limit: CondensateTrajectory) -> List[List[float]]:
        """‖φ_{N,T} − φ_T‖₂ over the particle sweep, with the fitted log-log slope"""
        t_final = limit.final_time
        rows = []
        for n in self.settings.potential.n_sweep:
            hartree = self.hartree_trajectory(phi0, n)
            rows.append([n, distance_to_limit(limit, hartree, t_final)])
        ns = np.array([row[0] for row in rows])
        distances = np.array([row[1] for row in rows])
        if len(rows) >= 2 and np.all(distances > 0):
            slope = log_slope(ns, distances)
            beta = self.settings.potential.beta
            self.summary['distance_slope'] = slope
            self.summary['expected_rate'] = -min(beta, 1.0 - beta)
            logger.info(f"Condensate convergence slope {slope:.3f} (rate {-min(beta, 1.0 - beta):.3f})")
        return rows
