"""
Run Configuration Settings
Manages every configuration parameter of a fluctuation run: lattice, potential, scattering,
condensate, Bogoliubov evolution, observables, oracle checks, output and logging
"""

import configparser
import hashlib
import re
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

from dotenv import load_dotenv
from loguru import logger
from pydantic import BeforeValidator, Field, ValidationError
from typing_extensions import Annotated

try:
    from pydantic_settings import BaseSettings
except ImportError:
    from pydantic import BaseSettings

from models.base import ConfigurationError


def _split_list(value: Any) -> Any:
    """Accept comma separated INI values for list fields"""
    if isinstance(value, str):
        parts = [part.strip() for part in value.split(',')]
        return [part for part in parts if part]
    if isinstance(value, (int, float)):
        return [value]
    return value


FloatList = Annotated[List[float], BeforeValidator(_split_list)]


class LatticeSettings(BaseSettings):
    """Periodic lattice configuration"""

    d: int = Field(default=1, description="Spatial dimension (1, 2 or 3)")
    m_axis: int = Field(default=64, description="Points per axis (even)")
    length: float = Field(default=10.0, description="Box side length L")

    class Config:
        env_prefix = "BF_LATTICE_"
        extra = "forbid"


class PotentialSettings(BaseSettings):
    """Pair potential and particle number configuration"""

    profile: str = Field(default="bump", description="Radial profile (bump/polynomial/square/zero)")
    amplitude: float = Field(default=1.0, description="Profile amplitude")
    support_radius: float = Field(default=1.0, description="Support radius R_V of the unscaled potential")
    beta: float = Field(default=0.5, description="Scaling exponent in (0, 1)")
    n_particles: float = Field(default=1000.0, description="Particle number N")
    n_sweep: FloatList = Field(default_factory=list, description="Particle numbers for convergence sweeps")

    class Config:
        env_prefix = "BF_POTENTIAL_"
        extra = "forbid"


class ScatteringSettings(BaseSettings):
    """Neumann scattering problem configuration"""

    ell: Optional[float] = Field(default=None, description="Ball radius; defaults to L/4")
    radial_points: int = Field(default=10_000, description="Radial grid points")
    omega_variant: str = Field(default="printed", description="Limiting profile variant (printed/neumann)")
    sup_delta: Optional[float] = Field(default=None, description="Inner radius of the sup error; defaults to ell/10")

    class Config:
        env_prefix = "BF_SCATTERING_"
        extra = "forbid"


class CondensateSettings(BaseSettings):
    """Condensate evolution configuration"""

    initial: str = Field(default="gaussian", description="Initial profile (gaussian/plane_wave)")
    width: Optional[float] = Field(default=None, description="Gaussian width; defaults to L/8")
    center: Optional[float] = Field(default=None, description="Gaussian center; defaults to L/2")
    momentum: float = Field(default=0.0, description="Boost wavenumber, or the mode index of a plane wave")
    sigma: Optional[float] = Field(default=None, description="NLS coupling; defaults to the potential integral")
    sigma_mode: str = Field(default="cubic", description="NLS nonlinearity (cubic/linear)")
    flavor: str = Field(default="nls", description="Trajectory driving the fluctuations (nls/hartree)")
    t_final: float = Field(default=0.5, description="Final time T")
    dt: float = Field(default=1e-3, description="Time step")

    class Config:
        env_prefix = "BF_CONDENSATE_"
        extra = "forbid"


class EvolutionSettings(BaseSettings):
    """Bogoliubov propagation configuration"""

    scheme: str = Field(default="cayley", description="Interaction step (cayley/rk2)")
    resymplectify_every: int = Field(default=0, description="Steps between polar corrections; 0 disables")
    record_every: int = Field(default=1, description="Steps between recorded diagnostics")
    tolerance: float = Field(default=1e-6, description="Maximum symplectic defect")
    profile: str = Field(default="limiting", description="Correlation profile (limiting/finite-N)")
    form: str = Field(default="exact", description="Fluctuation vector form (exact/printed)")
    cache_size: int = Field(default=4, description="Cached correlation kernels")

    class Config:
        env_prefix = "BF_EVOLUTION_"
        extra = "forbid"


class ObservableSettings(BaseSettings):
    """One fluctuation observable, read from an [observable.<name>] section"""

    kind: str = Field(default="window", description="Observable kind (window/momentum_window/rank_one/custom)")
    center: Optional[FloatList] = Field(default=None, description="Window or profile center; defaults to L/2")
    half_width: float = Field(default=1.0, description="Window half width")
    edge: float = Field(default=0.25, description="Window edge softness")
    cutoff: float = Field(default=2.0, description="Momentum window cutoff")
    width: Optional[float] = Field(default=None, description="Rank-one profile width; defaults to L/8")
    snapshot: Optional[str] = Field(default=None, description="Kernel snapshot file of a custom observable")

    class Config:
        env_prefix = "BF_OBSERVABLE_"
        extra = "forbid"


class OracleSettings(BaseSettings):
    """Truncated Fock space oracle configuration"""

    modes: int = Field(default=2, description="Number of modes M")
    n_max: int = Field(default=14, description="Total occupation cutoff")
    t: float = Field(default=0.5, description="Comparison time")
    dt: float = Field(default=1e-4, description="Bogoliubov time step")
    trials: int = Field(default=10, description="Random (f, g) pairs")
    pairing_scale: float = Field(default=0.1, description="Scale of the random pairing matrix")
    tolerance: float = Field(default=1e-6, description="Pass threshold on the defect")
    leakage_threshold: float = Field(default=1e-8, description="Largest admissible cutoff leakage")
    test_sector: int = Field(default=1, description="Occupation of the test states")
    dimension_limit: int = Field(default=20_000, description="Largest admissible Fock dimension")

    class Config:
        env_prefix = "BF_ORACLE_"
        extra = "forbid"


class OutputSettings(BaseSettings):
    """Artifact output configuration"""

    directory: str = Field(default="out", description="Output directory")
    plot: bool = Field(default=False, description="Write PNG plots next to the plot data")
    snapshots: bool = Field(default=False, description="Write binary kernel snapshots")
    snapshot_every: int = Field(default=100, description="Steps between kernel snapshots")

    class Config:
        env_prefix = "BF_OUTPUT_"
        extra = "forbid"


class LoggingSettings(BaseSettings):
    """Logging configuration settings"""

    log_level: str = Field(default="INFO", description="Logging level")
    enable_file_logging: bool = Field(default=False, description="Enable file logging")
    enable_console_logging: bool = Field(default=True, description="Enable console logging")

    log_directory: str = Field(default="logs", description="Log directory inside the output directory")
    log_file_name: str = Field(default="bogofluct.log", description="Log file name")
    max_log_size_mb: int = Field(default=10, description="Maximum log file size in MB")
    log_backup_count: int = Field(default=5, description="Number of log backup files")

    log_format: str = Field(
        default="{time:YYYY-MM-DD HH:mm:ss} | {level} | {name}:{function}:{line} | {message}",
        description="Log message format"
    )

    class Config:
        env_prefix = "BF_LOG_"
        extra = "forbid"


def _default_observables() -> Dict[str, ObservableSettings]:
    return {"window": ObservableSettings()}


class RunSettings(BaseSettings):
    """Complete configuration of one run"""

    seed: int = Field(default=0, description="Seed of every randomized test")

    lattice: LatticeSettings = Field(default_factory=LatticeSettings)
    potential: PotentialSettings = Field(default_factory=PotentialSettings)
    scattering: ScatteringSettings = Field(default_factory=ScatteringSettings)
    condensate: CondensateSettings = Field(default_factory=CondensateSettings)
    evolution: EvolutionSettings = Field(default_factory=EvolutionSettings)
    observables: Dict[str, ObservableSettings] = Field(default_factory=_default_observables)
    oracle: OracleSettings = Field(default_factory=OracleSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)

    class Config:
        env_prefix = "BF_"
        extra = "forbid"
        case_sensitive = False

    @property
    def ell(self) -> float:
        if self.scattering.ell is not None:
            return self.scattering.ell
        return self.lattice.length / 4.0


# ============================================================================
# INI serialization
# ============================================================================

RUN_SECTION = "run"
OBSERVABLE_PREFIX = "observable."
SECTION_MODELS = {
    "lattice": LatticeSettings,
    "potential": PotentialSettings,
    "scattering": ScatteringSettings,
    "condensate": CondensateSettings,
    "evolution": EvolutionSettings,
    "oracle": OracleSettings,
    "output": OutputSettings,
    "logging": LoggingSettings,
}
SECTION_ORDER = ["lattice", "potential", "scattering", "condensate", "evolution",
                 "observables", "oracle", "output", "logging"]
_OBSERVABLE_NAME = re.compile(r"^[A-Za-z0-9_\-]+$")

RawConfig = Dict[str, Dict[str, str]]


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(item) for item in value)
    return str(value)


def _section_lines(name: str, model: BaseSettings) -> List[str]:
    lines = [f"[{name}]"]
    for key in type(model).model_fields:
        value = getattr(model, key)
        if value is None:
            continue
        lines.append(f"{key} = {_format_value(value)}")
    return lines


def settings_to_ini(settings: RunSettings) -> str:
    """Canonical INI text: fixed section and key order, None omitted, floats by repr"""
    blocks = [[f"[{RUN_SECTION}]", f"seed = {settings.seed}"]]
    for section in SECTION_ORDER:
        if section == "observables":
            for name, observable in settings.observables.items():
                blocks.append(_section_lines(OBSERVABLE_PREFIX + name, observable))
        else:
            blocks.append(_section_lines(section, getattr(settings, section)))
    return "\n\n".join("\n".join(block) for block in blocks) + "\n"


def read_ini(text: str) -> RawConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigurationError(f"Unparseable configuration: {e}")
    return {section: dict(parser.items(section)) for section in parser.sections()}


def parse_override(override: str) -> Tuple[str, str, str]:
    """Split 'section.key=value' into (section, key, value)"""
    if '=' not in override:
        raise ConfigurationError(f"Override '{override}' is not of the form section.key=value")
    path, value = override.split('=', 1)
    path = path.strip()
    if '.' not in path:
        raise ConfigurationError(f"Override '{override}' lacks a section")
    section, key = path.rsplit('.', 1)
    return section.strip().lower(), key.strip().lower(), value.strip()


def apply_overrides(raw: RawConfig, overrides: Iterable[str]) -> RawConfig:
    merged = {section: dict(values) for section, values in raw.items()}
    for override in overrides:
        section, key, value = parse_override(override)
        merged.setdefault(section, {})[key] = value
        logger.debug(f"Override applied: {section}.{key} = {value}")
    return merged


def _build_section(name: str, model_class: type, values: Dict[str, str]) -> BaseSettings:
    try:
        return model_class(**values)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in error['loc'])}: {error['msg']}" for error in e.errors()
        )
        raise ConfigurationError(f"Invalid [{name}] section: {problems}", details={'section': name})


def build_settings(raw: RawConfig) -> RunSettings:
    """Turn raw INI sections into validated RunSettings, rejecting unknown sections and keys"""
    sections: Dict[str, Any] = {}
    observables: Dict[str, ObservableSettings] = {}
    seed: Any = 0

    for section, values in raw.items():
        if section == RUN_SECTION:
            unknown = set(values) - {"seed"}
            if unknown:
                raise ConfigurationError(f"Unknown keys in [run]: {sorted(unknown)}")
            seed = values.get("seed", 0)
        elif section.startswith(OBSERVABLE_PREFIX):
            name = section[len(OBSERVABLE_PREFIX):]
            if not _OBSERVABLE_NAME.match(name):
                raise ConfigurationError(f"Invalid observable name '{name}'")
            observables[name] = _build_section(section, ObservableSettings, values)
        elif section in SECTION_MODELS:
            sections[section] = _build_section(section, SECTION_MODELS[section], values)
        else:
            raise ConfigurationError(f"Unknown configuration section [{section}]")

    if observables:
        sections["observables"] = observables
    try:
        return RunSettings(seed=seed, **sections)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid run settings: {e}")


def parse_ini(text: str, overrides: Iterable[str] = ()) -> RunSettings:
    return build_settings(apply_overrides(read_ini(text), overrides))


def config_hash(settings: RunSettings) -> str:
    """SHA-256 of the canonical INI text"""
    return hashlib.sha256(settings_to_ini(settings).encode('utf-8')).hexdigest()


# ============================================================================
# Settings manager
# ============================================================================

class SettingsManager:
    """Manages run settings loading, overriding, validation and serialization"""

    def __init__(self, config_file: Optional[Union[str, Path]] = None,
                 overrides: Optional[List[str]] = None):
        self.config_file = Path(config_file) if config_file else None
        self.overrides = list(overrides or [])
        self._settings: Optional[RunSettings] = None

    def load_settings(self) -> RunSettings:
        """Load settings from the configuration file (or defaults) and apply overrides"""
        if self._settings is not None:
            return self._settings

        load_dotenv(override=False)
        raw: RawConfig = {}
        if self.config_file is not None:
            if not self.config_file.exists():
                raise ConfigurationError(f"Configuration file not found: {self.config_file}")
            raw = read_ini(self.config_file.read_text(encoding='utf-8'))
            logger.info(f"Loaded configuration from {self.config_file}")

        settings = build_settings(apply_overrides(raw, self.overrides))
        self.validate_settings(settings)
        self._settings = settings
        return settings

    def get_settings(self) -> RunSettings:
        """Get current settings instance"""
        if self._settings is None:
            return self.load_settings()
        return self._settings

    def update_setting(self, section: str, key: str, value: Any) -> RunSettings:
        """Update a single value through the same path as a --set override"""
        self.overrides.append(f"{section}.{key}={_format_value(value)}")
        self._settings = None
        return self.load_settings()

    def reset_to_defaults(self) -> RunSettings:
        self.config_file = None
        self.overrides = []
        self._settings = None
        return self.load_settings()

    def validate_settings(self, settings: Optional[RunSettings] = None) -> None:
        """Range-check settings; raises ConfigurationError on any error"""
        from utils.validation import RunSettingsValidator

        result = RunSettingsValidator().validate(settings or self.get_settings())
        for warning in result.warnings:
            logger.warning(f"Configuration: {warning}")
        if not result.is_valid:
            raise ConfigurationError(f"Configuration rejected: {'; '.join(result.errors)}",
                                     details={'errors': result.errors})

    def to_ini(self) -> str:
        return settings_to_ini(self.get_settings())

    def config_hash(self) -> str:
        return config_hash(self.get_settings())

    def save_settings(self, path: Union[str, Path]) -> Path:
        """Write the canonical INI text"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_ini(), encoding='utf-8')
        logger.debug(f"Canonical configuration written to {path}")
        return path


# Global settings instance
_settings_manager = None

def get_settings_manager(config_file: Optional[Union[str, Path]] = None,
                         overrides: Optional[List[str]] = None) -> SettingsManager:
    """Get the global settings manager, replacing it when a new source is given"""
    global _settings_manager
    if _settings_manager is None or config_file is not None or overrides is not None:
        _settings_manager = SettingsManager(config_file, overrides)
    return _settings_manager

def get_settings() -> RunSettings:
    """Get the current run settings"""
    return get_settings_manager().get_settings()
