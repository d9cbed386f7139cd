"""
Evolution Controller
Builds the correlation kernels along the condensate trajectory and propagates the
Bogoliubov pair, recording symplectic diagnostics and optional kernel snapshots
"""

from typing import Any, Callable, Dict, List, Optional

import numpy as np
from loguru import logger

from .base import BaseController
from .condensate import CondensateController
from .report import ReportController
from models.base import TimeSeries
from models.bogoliubov import BogoliubovPair, TrajectoryGenerators, propagate
from models.condensate import CondensateTrajectory
from models.kernels import (
    CorrelationProfile, FiniteNProfile, KernelBuilder, KernelFamily, LimitingProfile,
    family_defects, save_kernel_snapshot
)
from utils import timed_stage
from utils.validation import defect_check

StepCallback = Callable[[BogoliubovPair, KernelFamily], None]


class EvolutionController(BaseController):
    """Controller for the kernel and Bogoliubov propagation stages"""

    stage = "evolve"

    def __init__(self, *args, condensate: Optional[CondensateController] = None, **kwargs):
        super().__init__(*args, **kwargs)
        self.condensate = condensate or CondensateController(self.settings, self.resources)
        self.builder: Optional[KernelBuilder] = None
        self.generators: Optional[TrajectoryGenerators] = None
        self.pair: Optional[BogoliubovPair] = None
        self.series: Optional[TimeSeries] = None
        self.summary: Dict[str, Any] = {}
        self._step_callbacks: List[StepCallback] = []

    @property
    def scattering(self):
        return self.condensate.scattering

    def add_step_callback(self, callback: StepCallback) -> None:
        """Called with (pair, kernel family) after every propagation step"""
        self._step_callbacks.append(callback)

    def profile(self) -> CorrelationProfile:
        config = self.settings
        if config.evolution.profile == "finite-N":
            return FiniteNProfile(self.scattering.solution_for(config.potential.n_particles))
        b0 = self.scattering.potential().b0
        return LimitingProfile(config.ell, b0, config.scattering.omega_variant)

    def trajectory(self) -> CondensateTrajectory:
        if self.condensate.trajectory is None:
            self.condensate.run()
        return self.condensate.trajectory

    def kernel_builder(self) -> KernelBuilder:
        if self.builder is None:
            b0 = self.scattering.potential().b0
            self.builder = KernelBuilder(self.trajectory(), self.profile(), b0,
                                         cache_size=self.settings.evolution.cache_size)
        return self.builder

    def initial_family(self) -> KernelFamily:
        return self.kernel_builder().family_at(0)

    @timed_stage("evolve")
    def run(self, write: bool = True) -> BogoliubovPair:
        """
        Propagate Θ(t;0) over the condensate time span and write evolve.csv

        Returns:
            BogoliubovPair: the pair at the final time
        """
        return self.execute_stage(self._run, write)

    def _run(self, write: bool) -> BogoliubovPair:
        settings = self.settings
        evolution = settings.evolution
        builder = self.kernel_builder()
        trajectory = builder.trajectory
        self.generators = TrajectoryGenerators(builder, settings.ell, builder.b0)

        snapshot_every = settings.output.snapshot_every if settings.output.snapshots else 0
        if snapshot_every:
            self._write_snapshots(0, builder.eta_at(0),
                                  BogoliubovPair.identity(trajectory.lattice.size, lattice=trajectory.lattice))

        def on_step(pair: BogoliubovPair) -> None:
            step = int(round(pair.t / trajectory.dt))
            family = self.generators.last_family
            if snapshot_every and step % snapshot_every == 0:
                self._write_snapshots(step, family.eta, pair)
            for callback in self._step_callbacks:
                callback(pair, family)

        pair, series = propagate(
            self.generators, 0.0, trajectory.final_time, trajectory.dt,
            scheme=evolution.scheme, tolerance=evolution.tolerance,
            resymplectify_every=evolution.resymplectify_every,
            record_every=evolution.record_every, on_step=on_step,
        )
        self.pair, self.series = pair, series
        self._summarize(pair, series, builder)

        if write:
            report = ReportController(self.settings, self.resources)
            report.write_time_series("evolve", series)
            report.write_plot("evolve", series, "t", ["sympl_defect", "intertwining_defect"],
                              "defect", logy=True)
            self.merge_validation(report.validation)
        logger.info(f"Evolution stage: {pair}")
        return pair

    def _write_snapshots(self, step: int, eta, pair: BogoliubovPair) -> None:
        for name, kernel in (("eta", eta), ("V", pair.V)):
            path = self.resources.get_snapshot_path(name, step)
            save_kernel_snapshot(path, kernel, pair.t)
            self.resources.register("snapshot", path)

    def _summarize(self, pair: BogoliubovPair, series: TimeSeries, builder: KernelBuilder) -> None:
        sympl = series.column("sympl_defect")
        hermiticity = max(self.generators.hermiticity_defects, default=0.0)
        self.merge_validation(defect_check("max_sympl_defect", float(np.max(sympl)),
                                           self.settings.evolution.tolerance))
        if hermiticity > 0:
            self.merge_validation(defect_check("max_generator_hermiticity_defect", hermiticity, 1e-8))
        for message in builder.warnings:
            self.record_warning(message, "KERNELS")

        final_family = self.generators.last_family or builder.family_at(0)
        self.summary = {
            'profile': builder.profile.provenance.value,
            'scheme': self.settings.evolution.scheme,
            'steps': builder.trajectory.steps,
            'final_time': pair.t,
            'V_hs_sq': pair.vacuum_number(),
            'max_sympl_defect': float(np.max(sympl)),
            'max_intertwining_defect': float(np.max(series.column("intertwining_defect"))),
            'max_U_opnorm': float(np.max(series.column("U_opnorm"))),
            'max_generator_hermiticity_defect': hermiticity,
            'kernel_norms': dict(final_family.norms),
            'family_defects_initial': family_defects(builder.family_at(0)),
            'family_defects_final': family_defects(final_family),
        }
