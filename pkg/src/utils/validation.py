"""
Validation Classes
Range and consistency validation for run configurations and numerical soft conditions
"""

from enum import Enum
from math import comb
from typing import Any, Dict, List, Optional, Union

from loguru import logger

from models.bogoliubov import SCHEMES
from models.clt import FLUCTUATION_FORMS
from models.condensate import MIN_POINTS_ACROSS_SUPPORT, SIGMA_MODES
from models.scattering import OMEGA_VARIANTS, PROFILES

from .validators import (
    validate_choice, validate_dimension, validate_even_axis, validate_file_path,
    validate_non_negative, validate_open_unit_interval, validate_particle_sweep,
    validate_positive, validate_seed, validate_step_divides
)

INITIAL_PROFILES = ("gaussian", "plane_wave")
CONDENSATE_FLAVORS = ("nls", "hartree")
CORRELATION_PROFILES = ("limiting", "finite-N")
OBSERVABLE_KINDS = ("window", "momentum_window", "rank_one", "custom")
LOG_LEVELS = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL")
# Largest number of lattice sites for which dense kernels are assembled
MAX_LATTICE_SITES = 4096


class ValidationSeverity(Enum):
    """Validation message severity levels"""
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


class ValidationMessage:
    """Validation message with severity and details"""

    def __init__(self, message: str, severity: ValidationSeverity = ValidationSeverity.ERROR,
                 field: Optional[str] = None, code: Optional[str] = None):
        self.message = message
        self.severity = severity
        self.field = field
        self.code = code

    def to_dict(self) -> Dict[str, Any]:
        return {
            'message': self.message,
            'severity': self.severity.value,
            'field': self.field,
            'code': self.code
        }


class ValidationResult:
    """Collected validation messages"""

    def __init__(self):
        self.messages: List[ValidationMessage] = []
        self.data: Dict[str, Any] = {}

    def add_error(self, message: str, field: Optional[str] = None, code: Optional[str] = None):
        """Add an error message"""
        self.messages.append(ValidationMessage(message, ValidationSeverity.ERROR, field, code))

    def add_warning(self, message: str, field: Optional[str] = None, code: Optional[str] = None):
        """Add a warning message"""
        self.messages.append(ValidationMessage(message, ValidationSeverity.WARNING, field, code))

    def add_info(self, message: str, field: Optional[str] = None, code: Optional[str] = None):
        """Add an info message"""
        self.messages.append(ValidationMessage(message, ValidationSeverity.INFO, field, code))

    def extend(self, other: 'ValidationResult') -> 'ValidationResult':
        self.messages.extend(other.messages)
        self.data.update(other.data)
        return self

    @property
    def is_valid(self) -> bool:
        """Check if validation passed (no errors)"""
        return not any(msg.severity == ValidationSeverity.ERROR for msg in self.messages)

    @property
    def errors(self) -> List[str]:
        """Get error messages only"""
        return [msg.message for msg in self.messages if msg.severity == ValidationSeverity.ERROR]

    @property
    def warnings(self) -> List[str]:
        """Get warning messages only"""
        return [msg.message for msg in self.messages if msg.severity == ValidationSeverity.WARNING]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary format"""
        return {
            'is_valid': self.is_valid,
            'errors': self.errors,
            'warnings': self.warnings,
            'messages': [msg.to_dict() for msg in self.messages],
            'data': self.data
        }


class BaseValidator:
    """Base validator class with common functionality"""

    section: str = ""

    def __init__(self):
        self.result = ValidationResult()

    def _name(self, field: str) -> str:
        return f"{self.section}.{field}" if self.section else field

    def _validate_range(self, value: Union[int, float], min_value: Union[int, float, None] = None,
                        max_value: Union[int, float, None] = None, field: Optional[str] = None) -> bool:
        """Validate numeric range"""
        if min_value is not None and value < min_value:
            self.result.add_error(
                f"Field '{self._name(field)}' must be at least {min_value}, got {value}",
                field, 'MIN_VALUE'
            )
            return False

        if max_value is not None and value > max_value:
            self.result.add_error(
                f"Field '{self._name(field)}' must not exceed {max_value}, got {value}",
                field, 'MAX_VALUE'
            )
            return False

        return True

    def _validate_positive(self, value: Any, field: str) -> bool:
        if not validate_positive(value):
            self.result.add_error(f"Field '{self._name(field)}' must be positive, got {value}",
                                  field, 'NOT_POSITIVE')
            return False
        return True

    def _validate_non_negative(self, value: Any, field: str) -> bool:
        if not validate_non_negative(value):
            self.result.add_error(f"Field '{self._name(field)}' must be non-negative, got {value}",
                                  field, 'NEGATIVE')
            return False
        return True

    def _validate_choice(self, value: Any, choices, field: str) -> bool:
        if not validate_choice(value, choices):
            self.result.add_error(
                f"Field '{self._name(field)}' must be one of {list(choices)}, got '{value}'",
                field, 'INVALID_CHOICE'
            )
            return False
        return True

    def _start(self) -> ValidationResult:
        self.result = ValidationResult()
        return self.result


class LatticeValidator(BaseValidator):
    """Validator for the [lattice] section"""

    section = "lattice"

    def validate(self, lattice) -> ValidationResult:
        result = self._start()
        if not validate_dimension(lattice.d):
            result.add_error(f"Field 'lattice.d' must be 1, 2 or 3, got {lattice.d}", 'd', 'INVALID_CHOICE')
        if not validate_even_axis(lattice.m_axis):
            result.add_error(f"Field 'lattice.m_axis' must be an even integer >= 2, got {lattice.m_axis}",
                             'm_axis', 'NOT_EVEN')
        self._validate_positive(lattice.length, 'length')
        if result.is_valid and lattice.m_axis ** lattice.d > MAX_LATTICE_SITES:
            result.add_error(
                f"Lattice with {lattice.m_axis ** lattice.d} sites exceeds the dense kernel limit "
                f"{MAX_LATTICE_SITES}", 'm_axis', 'MAX_VALUE'
            )
        return result


class PotentialValidator(BaseValidator):
    """Validator for the [potential] section"""

    section = "potential"

    def validate(self, potential) -> ValidationResult:
        result = self._start()
        self._validate_choice(potential.profile, PROFILES, 'profile')
        self._validate_non_negative(potential.amplitude, 'amplitude')
        self._validate_positive(potential.support_radius, 'support_radius')
        if not validate_open_unit_interval(potential.beta):
            result.add_error(f"Field 'potential.beta' must lie in (0, 1), got {potential.beta}",
                             'beta', 'OUT_OF_RANGE')
        self._validate_positive(potential.n_particles, 'n_particles')
        if potential.n_sweep and not validate_particle_sweep(potential.n_sweep):
            result.add_error("Field 'potential.n_sweep' must be positive and strictly increasing",
                             'n_sweep', 'INVALID_SWEEP')
        return result


class ScatteringValidator(BaseValidator):
    """Validator for the [scattering] section against the potential and lattice"""

    section = "scattering"

    def validate(self, scattering, potential, lattice) -> ValidationResult:
        result = self._start()
        self._validate_range(scattering.radial_points, 100, None, 'radial_points')
        self._validate_choice(scattering.omega_variant, OMEGA_VARIANTS, 'omega_variant')
        ell = scattering.ell if scattering.ell is not None else lattice.length / 4.0
        if not self._validate_positive(ell, 'ell'):
            return result
        if ell > lattice.length / 2.0:
            result.add_warning(f"ell={ell:g} exceeds half the box L/2={lattice.length / 2.0:g}; "
                               f"correlations wrap around the torus", 'ell', 'WRAP_AROUND')
        for n in [potential.n_particles] + list(potential.n_sweep):
            if validate_positive(n) and potential.support_radius * n ** (-potential.beta) >= ell:
                result.add_error(
                    f"ell={ell:g} does not contain the scaled support of V at N={n:g}", 'ell', 'ELL_TOO_SMALL'
                )
        if scattering.sup_delta is not None and not 0 < scattering.sup_delta < ell:
            result.add_error(f"Field 'scattering.sup_delta' must lie in (0, ell), got {scattering.sup_delta}",
                             'sup_delta', 'OUT_OF_RANGE')
        return result


class CondensateValidator(BaseValidator):
    """Validator for the [condensate] section"""

    section = "condensate"

    def validate(self, condensate, lattice) -> ValidationResult:
        result = self._start()
        self._validate_choice(condensate.initial, INITIAL_PROFILES, 'initial')
        self._validate_choice(condensate.sigma_mode, SIGMA_MODES, 'sigma_mode')
        self._validate_choice(condensate.flavor, CONDENSATE_FLAVORS, 'flavor')
        self._validate_non_negative(condensate.t_final, 't_final')
        if self._validate_positive(condensate.dt, 'dt'):
            if not validate_step_divides(condensate.t_final, condensate.dt):
                result.add_error(f"t_final={condensate.t_final:g} is not a multiple of dt={condensate.dt:g}",
                                 't_final', 'NOT_MULTIPLE')
        if condensate.width is not None:
            self._validate_positive(condensate.width, 'width')
        if condensate.sigma is not None:
            self._validate_non_negative(condensate.sigma, 'sigma')
        if condensate.initial == "plane_wave" and float(condensate.momentum) != int(condensate.momentum):
            result.add_error("A plane wave needs an integer mode index in 'condensate.momentum'",
                             'momentum', 'NOT_INTEGER')
        return result


class EvolutionValidator(BaseValidator):
    """Validator for the [evolution] section"""

    section = "evolution"

    def validate(self, evolution) -> ValidationResult:
        result = self._start()
        self._validate_choice(evolution.scheme, SCHEMES, 'scheme')
        self._validate_choice(evolution.profile, CORRELATION_PROFILES, 'profile')
        self._validate_choice(evolution.form, FLUCTUATION_FORMS, 'form')
        self._validate_range(evolution.resymplectify_every, 0, None, 'resymplectify_every')
        self._validate_range(evolution.record_every, 1, None, 'record_every')
        self._validate_range(evolution.cache_size, 3, None, 'cache_size')
        self._validate_positive(evolution.tolerance, 'tolerance')
        if evolution.scheme == "rk2" and evolution.resymplectify_every == 0:
            result.add_info("Explicit RK2 without resymplectification drifts off the symplectic group",
                            'scheme', 'DRIFT')
        return result


class ObservableValidator(BaseValidator):
    """Validator for one [observable.<name>] section"""

    def validate(self, name: str, observable, lattice) -> ValidationResult:
        self.section = f"observable.{name}"
        result = self._start()
        self._validate_choice(observable.kind, OBSERVABLE_KINDS, 'kind')
        if observable.center is not None and len(observable.center) not in (1, lattice.d):
            result.add_error(f"Field '{self._name('center')}' needs 1 or {lattice.d} components",
                             'center', 'SHAPE')
        if observable.kind == "window":
            self._validate_positive(observable.half_width, 'half_width')
            self._validate_positive(observable.edge, 'edge')
        elif observable.kind == "momentum_window":
            self._validate_positive(observable.cutoff, 'cutoff')
            self._validate_positive(observable.edge, 'edge')
        elif observable.kind == "rank_one" and observable.width is not None:
            self._validate_positive(observable.width, 'width')
        elif observable.kind == "custom":
            if not validate_file_path(observable.snapshot or ""):
                result.add_error(f"Custom observable '{name}' references a missing snapshot "
                                 f"'{observable.snapshot}'", 'snapshot', 'FILE_NOT_FOUND')
        return result


class OracleValidator(BaseValidator):
    """Validator for the [oracle] section"""

    section = "oracle"

    def validate(self, oracle) -> ValidationResult:
        result = self._start()
        self._validate_range(oracle.modes, 1, None, 'modes')
        self._validate_range(oracle.n_max, 3, None, 'n_max')
        self._validate_range(oracle.trials, 1, None, 'trials')
        self._validate_range(oracle.test_sector, 0, None, 'test_sector')
        self._validate_non_negative(oracle.pairing_scale, 'pairing_scale')
        self._validate_positive(oracle.tolerance, 'tolerance')
        self._validate_positive(oracle.leakage_threshold, 'leakage_threshold')
        if self._validate_positive(oracle.dt, 'dt') and not validate_step_divides(abs(oracle.t), oracle.dt):
            result.add_error(f"|t|={abs(oracle.t):g} is not a multiple of dt={oracle.dt:g}", 't', 'NOT_MULTIPLE')
        if result.is_valid:
            if oracle.test_sector > oracle.n_max - 2:
                result.add_error("Field 'oracle.test_sector' must leave two sectors below n_max",
                                 'test_sector', 'MAX_VALUE')
            dimension = comb(oracle.n_max + oracle.modes, oracle.modes)
            if dimension > oracle.dimension_limit:
                result.add_error(f"Fock dimension {dimension} exceeds the limit {oracle.dimension_limit}",
                                 'n_max', 'DIMENSION')
        return result


class OutputValidator(BaseValidator):
    """Validator for the [output] and [logging] sections"""

    section = "output"

    def validate(self, output, logging_settings) -> ValidationResult:
        result = self._start()
        if not output.directory:
            result.add_error("Field 'output.directory' is required", 'directory', 'REQUIRED')
        self._validate_range(output.snapshot_every, 1, None, 'snapshot_every')
        if str(logging_settings.log_level).upper() not in LOG_LEVELS:
            result.add_error(f"Field 'logging.log_level' must be one of {list(LOG_LEVELS)}",
                             'log_level', 'INVALID_CHOICE')
        self._validate_range(logging_settings.max_log_size_mb, 1, None, 'max_log_size_mb')
        self._validate_range(logging_settings.log_backup_count, 0, None, 'log_backup_count')
        return result


class RunSettingsValidator:
    """Validates a complete run configuration section by section"""

    def validate(self, settings) -> ValidationResult:
        result = ValidationResult()
        if not validate_seed(settings.seed):
            result.add_error(f"Field 'run.seed' must be an unsigned 64-bit integer, got {settings.seed}",
                             'seed', 'OUT_OF_RANGE')

        result.extend(LatticeValidator().validate(settings.lattice))
        result.extend(PotentialValidator().validate(settings.potential))
        result.extend(ScatteringValidator().validate(settings.scattering, settings.potential, settings.lattice))
        result.extend(CondensateValidator().validate(settings.condensate, settings.lattice))
        result.extend(EvolutionValidator().validate(settings.evolution))
        if not settings.observables:
            result.add_error("At least one [observable.<name>] section is required", 'observables', 'REQUIRED')
        for name, observable in settings.observables.items():
            result.extend(ObservableValidator().validate(name, observable, settings.lattice))
        result.extend(OracleValidator().validate(settings.oracle))
        result.extend(OutputValidator().validate(settings.output, settings.logging))

        if not result.is_valid:
            logger.debug(f"Configuration validation failed with {len(result.errors)} error(s)")
        return result


def resolution_check(scaled_support: float, spacing: float) -> ValidationResult:
    """Soft check that the lattice resolves the scaled potential support"""
    result = ValidationResult()
    points = scaled_support / spacing
    result.data['points_across_support'] = points
    if points < MIN_POINTS_ACROSS_SUPPORT:
        result.add_warning(
            f"only {points:.2f} lattice points across the scaled support; "
            f"V_N f_N is replaced by its cell average", 'spacing', 'UNDER_RESOLVED'
        )
    return result


def defect_check(name: str, value: float, tolerance: float) -> ValidationResult:
    """Soft check of a numerical defect against its tolerance"""
    result = ValidationResult()
    result.data[name] = value
    if value > tolerance:
        result.add_warning(f"{name} = {value:.3e} exceeds {tolerance:.1e}", name, 'DEFECT')
    return result
