"""
Report Controller
Writes run artifacts: fixed-column CSV tables with lossless floats, plot data and PNG plots,
and the JSON manifest tying every output to the configuration hash
"""

import csv
import json
import platform
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import matplotlib
import numpy as np
from loguru import logger

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .base import BaseController
from config import APP_NAME, APP_VERSION
from config.settings import config_hash, settings_to_ini
from models.base import TimeSeries
from utils import format_row

VERSIONED_PACKAGES = ("numpy", "scipy", "pydantic", "pydantic-settings", "loguru", "matplotlib")


def json_default(value: Any) -> Any:
    """json.dumps fallback for numpy scalars, arrays, complex numbers and paths"""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, complex):
        return {'re': value.real, 'im': value.imag}
    if isinstance(value, np.ndarray):
        return [json_default(item) for item in value.tolist()]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (float, int, str, bool)) or value is None:
        return value
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def package_versions() -> Dict[str, str]:
    versions = {APP_NAME: APP_VERSION, 'python': platform.python_version()}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "not installed"
    return versions


class ReportController(BaseController):
    """Controller for artifact writing"""

    stage = "report"

    def write_csv(self, stem: str, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
        """
        Write a CSV table with a fixed column order

        Args:
            stem: File name without suffix
            columns: Header row
            rows: Data rows; floats are written with 17 significant digits

        Returns:
            Path: Written file
        """
        self.initialize()
        path = self.resources.get_csv_path(stem)
        with open(path, 'w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(list(columns))
            for row in rows:
                if len(row) != len(columns):
                    raise ValueError(f"Row of length {len(row)} for {len(columns)} columns in {stem}")
                writer.writerow(format_row(row))
        self.resources.register("csv", path)
        logger.info(f"Wrote {len(rows)} rows to {path}")
        return path

    def write_time_series(self, stem: str, series: TimeSeries) -> Path:
        return self.write_csv(stem, series.columns, series.rows())

    def write_json(self, stem: str, payload: Dict[str, Any]) -> Path:
        self.initialize()
        path = self.resources.get_json_path(stem)
        text = json.dumps(payload, indent=2, sort_keys=True, default=json_default)
        path.write_text(text + "\n", encoding="utf-8")
        self.resources.register("json", path)
        logger.info(f"Wrote {path}")
        return path

    def write_plot(self, stem: str, series: TimeSeries, x_column: str, y_columns: List[str],
                   ylabel: str, logy: bool = False) -> Optional[Path]:
        """PNG line plot of selected columns; skipped unless output.plot is set"""
        if not self.settings.output.plot:
            return None
        self.initialize()
        path = self.resources.get_plot_path(stem)
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        x = series.column(x_column)
        for column in y_columns:
            ax.plot(x, series.column(column), label=column)
        ax.set_xlabel(x_column)
        ax.set_ylabel(ylabel)
        if logy:
            ax.set_yscale("log")
        if len(y_columns) > 1:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        self.resources.register("png", path)
        return path

    def build_manifest(self, command: str, stages: Dict[str, Dict[str, Any]],
                       warnings: List[str]) -> Dict[str, Any]:
        """
        Collect versions, configuration hash, tolerances, defects and artifacts of a run

        Args:
            command: CLI subcommand that produced the artifacts
            stages: Per-stage summaries (achieved defects, norms, slopes)
            warnings: Soft numerical conditions recorded along the run

        Returns:
            dict: Manifest payload
        """
        settings = self.settings
        return {
            'command': command,
            'versions': package_versions(),
            'config_hash': config_hash(settings),
            'config': settings_to_ini(settings),
            'seed': settings.seed,
            'tolerances': {
                'symplectic_defect': settings.evolution.tolerance,
                'oracle_defect': settings.oracle.tolerance,
                'oracle_leakage': settings.oracle.leakage_threshold,
            },
            'stages': stages,
            'warnings': list(warnings),
            'artifacts': self.resources.written_artifacts(),
        }

    def write_manifest(self, command: str, stages: Dict[str, Dict[str, Any]],
                       warnings: List[str]) -> Path:
        manifest = self.build_manifest(command, stages, warnings)
        manifest['artifacts'].append("manifest.json")
        manifest['artifacts'].sort()
        return self.write_json("manifest", manifest)
