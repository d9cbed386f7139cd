"""
Covariance Controller
Builds the configured observables and follows the covariance Σ_t of their fluctuation
vectors along the Bogoliubov propagation
"""

from typing import Any, Dict, List, Optional

import numpy as np
from loguru import logger

from .base import BaseController
from .evolution import EvolutionController
from .report import ReportController
from models.base import StructuralError
from models.bogoliubov import BogoliubovPair
from models.clt import CovarianceReport, Observable, fluctuation_report, variance_time_series
from models.condensate import gaussian_initial_state
from models.grid import Lattice
from models.kernels import KernelFamily, load_kernel_snapshot
from utils import timed_stage

COVARIANCE_COLUMNS = ["t", "i", "j", "re_sigma_ij", "im_sigma_ij", "det_sigma", "var_sigma_t"]


def build_observable(name: str, config, lattice: Lattice) -> Observable:
    """Observable of one [observable.<name>] section"""
    center = list(config.center) if config.center is not None else [0.5 * lattice.length]
    if config.kind == "momentum_window":
        return Observable.momentum_window(name, lattice, config.cutoff, config.edge)
    if config.kind == "rank_one":
        profile = gaussian_initial_state(lattice, config.width, np.asarray(center, dtype=float))
        return Observable.rank_one(name, profile)
    if config.kind == "custom":
        kernel, _ = load_kernel_snapshot(config.snapshot)
        if kernel.lattice != lattice:
            raise StructuralError(f"Observable '{name}' snapshot lives on {kernel.lattice}, run uses {lattice}")
        return Observable.custom(name, kernel)
    return Observable.window(name, lattice, center, config.half_width, config.edge)


class CovarianceController(BaseController):
    """Controller for the covariance stage"""

    stage = "covariance"

    def __init__(self, *args, evolution: Optional[EvolutionController] = None, **kwargs):
        super().__init__(*args, **kwargs)
        self.evolution = evolution or EvolutionController(self.settings, self.resources)
        self.observables: List[Observable] = []
        self.reports: List[CovarianceReport] = []
        self.summary: Dict[str, Any] = {}

    def build_observables(self) -> List[Observable]:
        lattice = self.evolution.condensate.lattice()
        return [build_observable(name, config, lattice)
                for name, config in self.settings.observables.items()]

    def report_at(self, pair: BogoliubovPair, family: KernelFamily) -> CovarianceReport:
        report = fluctuation_report(self.observables, family.phi, family, pair,
                                    form=self.settings.evolution.form)
        for message in report.warnings:
            self.validation.add_warning(message, self.stage, 'COVARIANCE')
        self.reports.append(report)
        return report

    @timed_stage("covariance")
    def run(self, write: bool = True) -> List[CovarianceReport]:
        """
        Evolve the fluctuations and record Σ_t at every recorded step

        Returns:
            List[CovarianceReport]: covariance reports in time order, starting at t = 0
        """
        return self.execute_stage(self._run, write)

    def _run(self, write: bool) -> List[CovarianceReport]:
        self.observables = self.build_observables()
        self.reports = []
        record_every = self.settings.evolution.record_every

        initial = self.evolution.initial_family()
        lattice = initial.lattice
        self.report_at(BogoliubovPair.identity(lattice.size, lattice=lattice), initial)

        steps = self.evolution.trajectory().steps
        dt = self.evolution.trajectory().dt

        def on_step(pair: BogoliubovPair, family: KernelFamily) -> None:
            step = int(round(pair.t / dt))
            if step % record_every == 0 or step == steps:
                self.report_at(pair, family)

        self.evolution.add_step_callback(on_step)
        self.evolution.run(write=write)
        self.merge_validation(self.evolution.validation)

        final = self.reports[-1]
        self.summary = {
            'observables': [o.name for o in self.observables],
            'reports': len(self.reports),
            'final_time': final.t,
            'final_sigma': final.sigma,
            'final_det_sigma': final.determinant,
            'final_condition_number': final.condition_number,
            'max_hermiticity_defect': max(r.hermiticity_defect for r in self.reports),
            'singular_times': [r.t for r in self.reports if r.singular],
        }
        if write:
            self.write(self.reports)
        logger.info(f"Covariance stage: {len(self.reports)} reports for {len(self.observables)} observables")
        return self.reports

    def rows(self, reports: List[CovarianceReport]) -> List[List[Any]]:
        rows = []
        for report in reports:
            det = report.determinant.real
            for i in range(report.size):
                variance = report.sigma[i, i].real
                for j in range(report.size):
                    value = report.sigma[i, j]
                    rows.append([report.t, i, j, value.real, value.imag, det, variance])
        return rows

    def write(self, reports: List[CovarianceReport]) -> None:
        report = ReportController(self.settings, self.resources)
        report.write_csv("covariance", COVARIANCE_COLUMNS, self.rows(reports))
        series = variance_time_series(reports)
        report.write_time_series("covariance_plot", series)
        report.write_plot("covariance", series, "t", series.columns[1:], "variance")
        self.merge_validation(report.validation)
