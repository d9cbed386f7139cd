"""
Utils Package
Utility functions and helper classes for the fluctuation toolkit

- Validators: boolean checks for numeric run parameters
- Validation: ValidationResult machinery and run configuration validators
- Resource Manager: output directory and artifact paths
- Formatters: lossless number formatting for CSV and JSON output
- Decorators: stage timing
"""

import functools
import time
from typing import Any, Callable, Iterable, List

from loguru import logger

from .resource_manager import ResourceManager, get_resource_manager
from .validators import (
    validate_choice,
    validate_dimension,
    validate_even_axis,
    validate_file_path,
    validate_non_negative,
    validate_open_unit_interval,
    validate_particle_sweep,
    validate_positive,
    validate_seed,
    validate_step_divides,
)

# Significant digits that round-trip every IEEE double
FLOAT_DIGITS = 17


def format_float(number: Any) -> str:
    """
    Format a number with 17 significant digits

    Args:
        number: Number to format (ints are written as ints)

    Returns:
        str: Formatted number string
    """
    if isinstance(number, bool):
        return "1" if number else "0"
    if isinstance(number, int):
        return str(number)
    return f"{float(number):.{FLOAT_DIGITS}g}"


def format_row(values: Iterable[Any]) -> List[str]:
    return [format_float(value) if not isinstance(value, str) else value for value in values]


def timed_stage(name: str):
    """
    Decorator logging start, finish and wall time of a pipeline stage

    Args:
        name: Stage name used in the log lines

    Returns:
        Decorator function
    """
    def decorator(func: Callable):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            logger.info(f"Stage '{name}' started")
            start = time.perf_counter()
            result = func(*args, **kwargs)
            logger.info(f"Stage '{name}' finished in {time.perf_counter() - start:.2f}s")
            return result

        return wrapper
    return decorator


__all__ = [
    # Validators
    "validate_choice",
    "validate_dimension",
    "validate_even_axis",
    "validate_file_path",
    "validate_non_negative",
    "validate_open_unit_interval",
    "validate_particle_sweep",
    "validate_positive",
    "validate_seed",
    "validate_step_divides",

    # Resource manager
    "ResourceManager",
    "get_resource_manager",

    # Formatters
    "FLOAT_DIGITS",
    "format_float",
    "format_row",

    # Decorators
    "timed_stage",
]
