"""
Controllers Package
Exports the stage controllers of the fluctuation toolkit
"""

from .base import BaseController, ControllerManager, get_controller_manager
from .report import ReportController
from .scattering import ScatteringController
from .condensate import CondensateController
from .evolution import EvolutionController
from .covariance import CovarianceController
from .oracle import OracleController
from .pipeline import COMMAND_STAGES, PipelineController

__all__ = [
    # Base controller infrastructure
    'BaseController',
    'ControllerManager',
    'get_controller_manager',

    # Stage controllers
    'ReportController',
    'ScatteringController',
    'CondensateController',
    'EvolutionController',
    'CovarianceController',
    'OracleController',
    'PipelineController',
    'COMMAND_STAGES',
]


def cleanup_all_controllers() -> None:
    """
    Cleanup all controllers and resources
    """
    try:
        manager = get_controller_manager()
        manager.cleanup_all()

        from loguru import logger
        logger.debug("All controllers cleaned up")

    except Exception as e:
        from loguru import logger
        logger.error(f"Error cleaning up controllers: {e}")
