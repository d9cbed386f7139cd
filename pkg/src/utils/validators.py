"""
Validation Utilities
Provides numeric and choice validation functions for run parameters
"""

import math
from pathlib import Path
from typing import Any, Iterable, List, Optional, Union

Number = Union[int, float, str]


def _as_float(value: Any) -> Optional[float]:
    try:
        number = float(value)
    except (ValueError, TypeError):
        return None
    return number if math.isfinite(number) else None


def validate_positive(value: Number) -> bool:
    """
    Validate a strictly positive finite number

    Args:
        value: Number to validate

    Returns:
        bool: True if valid, False otherwise
    """
    number = _as_float(value)
    return number is not None and number > 0


def validate_non_negative(value: Number) -> bool:
    """
    Validate a non-negative finite number

    Args:
        value: Number to validate

    Returns:
        bool: True if valid, False otherwise
    """
    number = _as_float(value)
    return number is not None and number >= 0


def validate_open_unit_interval(value: Number) -> bool:
    """
    Validate a number strictly between 0 and 1 (scaling exponents)

    Args:
        value: Number to validate

    Returns:
        bool: True if valid, False otherwise
    """
    number = _as_float(value)
    return number is not None and 0.0 < number < 1.0


def validate_dimension(d: Union[int, str]) -> bool:
    """
    Validate a spatial dimension

    Args:
        d: Dimension to validate

    Returns:
        bool: True for 1, 2 or 3
    """
    try:
        return int(d) in (1, 2, 3) and float(d) == int(d)
    except (ValueError, TypeError):
        return False


def validate_even_axis(m_axis: Union[int, str], minimum: int = 2) -> bool:
    """
    Validate a lattice axis size

    Args:
        m_axis: Points per axis
        minimum: Smallest admissible size

    Returns:
        bool: True if an even integer of at least `minimum`
    """
    try:
        value = int(m_axis)
    except (ValueError, TypeError):
        return False
    return value >= minimum and value % 2 == 0


def validate_choice(value: Any, choices: Iterable[Any]) -> bool:
    """
    Validate membership in a fixed set of choices

    Args:
        value: Value to validate
        choices: Admissible values

    Returns:
        bool: True if value is one of the choices
    """
    return value in set(choices)


def validate_step_divides(total: Number, step: Number, rtol: float = 1e-9) -> bool:
    """
    Validate that a time interval is an integer multiple of a step

    Args:
        total: Interval length
        step: Step size

    Returns:
        bool: True if total / step is an integer up to rtol
    """
    total_f, step_f = _as_float(total), _as_float(step)
    if total_f is None or step_f is None or step_f <= 0:
        return False
    steps = round(total_f / step_f)
    return abs(steps * step_f - total_f) <= rtol * max(1.0, abs(total_f))


def validate_seed(seed: Union[int, str]) -> bool:
    """
    Validate an unsigned 64-bit seed

    Args:
        seed: Seed to validate

    Returns:
        bool: True if 0 <= seed < 2**64
    """
    try:
        value = int(seed)
    except (ValueError, TypeError):
        return False
    return 0 <= value < 2 ** 64


def validate_particle_sweep(values: List[float]) -> bool:
    """
    Validate a particle number sweep

    Args:
        values: Particle numbers

    Returns:
        bool: True if all positive and strictly increasing
    """
    if not all(validate_positive(v) for v in values):
        return False
    return all(a < b for a, b in zip(values, values[1:]))


def validate_file_path(file_path: str, allowed_extensions: Optional[List[str]] = None) -> bool:
    """
    Validate that a referenced file exists

    Args:
        file_path: Path to check
        allowed_extensions: Optional list of admissible suffixes

    Returns:
        bool: True if the file exists (and carries an allowed suffix)
    """
    if not file_path or not isinstance(file_path, str):
        return False
    path = Path(file_path)
    if allowed_extensions and path.suffix.lower() not in allowed_extensions:
        return False
    return path.is_file()
