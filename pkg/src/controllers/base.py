"""
Base Controller
Provides the base controller class and common functionality for the pipeline stages
"""

from typing import Any, Callable, Dict, Optional

from loguru import logger

from config.settings import RunSettings, get_settings
from models.base import BogoFluctError
from utils.resource_manager import ResourceManager, get_resource_manager
from utils.validation import ValidationResult


class BaseController:
    """
    Base controller class that provides common functionality for all stage controllers
    """

    # Name used in log lines and in the manifest
    stage: str = "base"

    def __init__(self, settings: Optional[RunSettings] = None,
                 resources: Optional[ResourceManager] = None):
        self.settings = settings if settings is not None else get_settings()
        self.resources = resources if resources is not None else get_resource_manager(
            self.settings.output.directory
        )
        self.validation = ValidationResult()
        self._initialized = False

    def initialize(self) -> bool:
        """
        Initialize the controller. Called lazily before the first stage run.

        Returns:
            bool: True if initialization successful
        """
        if self._initialized:
            return True
        self.resources.ensure_directories()
        self._initialized = self._do_initialize()
        if self._initialized:
            logger.debug(f"{self.__class__.__name__} initialized")
        else:
            logger.error(f"Failed to initialize {self.__class__.__name__}")
        return self._initialized

    def _do_initialize(self) -> bool:
        """Controller-specific initialization hook"""
        return True

    def emit_error(self, title: str, message: str) -> None:
        logger.error(f"{title}: {message}")
        self.validation.add_error(f"{title}: {message}", self.stage)

    def record_warning(self, message: str, code: str = "NUMERICAL") -> None:
        """Keep a soft numerical condition for the manifest"""
        logger.warning(message)
        self.validation.add_warning(message, self.stage, code)

    def merge_validation(self, result: ValidationResult) -> None:
        for warning in result.warnings:
            logger.warning(warning)
        self.validation.extend(result)

    def execute_stage(self, operation: Callable, *args, **kwargs) -> Any:
        """
        Run one stage operation, reporting toolkit errors before re-raising them

        Args:
            operation: Function to execute
            *args: Function arguments
            **kwargs: Function keyword arguments

        Returns:
            Any: Operation result
        """
        self.initialize()
        try:
            return operation(*args, **kwargs)
        except BogoFluctError as e:
            self.emit_error(f"{self.stage} failed", e.message)
            raise

    def cleanup(self) -> None:
        self.validation = ValidationResult()
        self._initialized = False


class ControllerManager:
    """
    Keeps the controllers of one run so they can be cleaned up together
    """

    def __init__(self):
        self._controllers: Dict[str, BaseController] = {}

    def register_controller(self, name: str, controller: BaseController) -> None:
        self._controllers[name] = controller

    def cleanup_all(self) -> None:
        for controller in self._controllers.values():
            controller.cleanup()
        self._controllers.clear()


# Global controller manager instance
_controller_manager = None

def get_controller_manager() -> ControllerManager:
    """Get the global controller manager instance"""
    global _controller_manager
    if _controller_manager is None:
        _controller_manager = ControllerManager()
    return _controller_manager
