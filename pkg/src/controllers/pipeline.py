"""
Pipeline Controller
Chains the stage controllers for one CLI subcommand and writes the run manifest
"""

from typing import Any, Dict, List, Optional

import numpy as np
from loguru import logger

from .base import BaseController, get_controller_manager
from .condensate import CondensateController
from .covariance import CovarianceController
from .evolution import EvolutionController
from .oracle import OracleController
from .report import ReportController
from .scattering import ScatteringController

# Stages each subcommand runs, upstream first; covariance drives the evolution itself
COMMAND_STAGES = {
    "scattering": ["scattering"],
    "condensate": ["scattering", "condensate"],
    "evolve": ["scattering", "condensate", "evolve"],
    "covariance": ["scattering", "condensate", "covariance"],
    "full-pipeline": ["scattering", "condensate", "covariance"],
    "oracle-verify": ["oracle"],
}


class PipelineController(BaseController):
    """Runs the stages of a subcommand against one settings object and one output directory"""

    stage = "pipeline"

    def __init__(self, *args, rng: Optional[np.random.Generator] = None, **kwargs):
        super().__init__(*args, **kwargs)
        self.rng = rng if rng is not None else np.random.default_rng(self.settings.seed)
        self.controllers: Dict[str, BaseController] = {}
        self._build()

    def _build(self) -> None:
        settings, resources = self.settings, self.resources
        scattering = ScatteringController(settings, resources)
        condensate = CondensateController(settings, resources, scattering=scattering)
        evolution = EvolutionController(settings, resources, condensate=condensate)
        self.controllers = {
            "scattering": scattering,
            "condensate": condensate,
            "evolve": evolution,
            "covariance": CovarianceController(settings, resources, evolution=evolution),
            "oracle": OracleController(settings, resources, rng=self.rng),
        }
        manager = get_controller_manager()
        for name, controller in self.controllers.items():
            manager.register_controller(name, controller)

    def stages_for(self, command: str) -> List[str]:
        if command not in COMMAND_STAGES:
            raise ValueError(f"Unknown command '{command}'")
        return COMMAND_STAGES[command]

    def run(self, command: str) -> Dict[str, Any]:
        """
        Run every stage of `command`, then write manifest.json

        Returns:
            dict: per-stage summaries keyed by stage name
        """
        stages = self.stages_for(command)
        logger.info(f"Running {command}: {' -> '.join(stages)}")
        for name in stages:
            self.controllers[name].run()
        summaries = self.summaries(command)
        ReportController(self.settings, self.resources).write_manifest(command, summaries, self.warnings())
        return summaries

    def summaries(self, command: str) -> Dict[str, Dict[str, Any]]:
        names = list(self.stages_for(command))
        if "covariance" in names:
            names.insert(names.index("covariance"), "evolve")
        summaries = {}
        for name in names:
            controller = self.controllers[name]
            summaries[name] = controller.result if name == "oracle" else controller.summary
        return summaries

    def warnings(self) -> List[str]:
        """Soft conditions recorded by every stage, in first-seen order"""
        seen: List[str] = []
        for controller in list(self.controllers.values()) + [self]:
            for message in controller.validation.warnings:
                if message not in seen:
                    seen.append(message)
        return seen

    @property
    def oracle(self) -> OracleController:
        return self.controllers["oracle"]

    def cleanup(self) -> None:
        get_controller_manager().cleanup_all()
        super().cleanup()
