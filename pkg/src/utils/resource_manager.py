"""
Resource Manager Utility
Manages the output directory of a run: CSV tables, plot data, manifests, kernel snapshots and logs
"""

from pathlib import Path
from typing import Dict, List, Optional, Union

from loguru import logger


class ResourceManager:
    """
    Manages run artifacts and provides centralized access to their paths
    """

    SNAPSHOT_SUFFIX = ".bin"

    def __init__(self, output_dir: Union[str, Path] = "out"):
        self.base_path = Path(output_dir)
        self.snapshots_path = self.base_path / "snapshots"
        self._written: Dict[str, Path] = {}

    def ensure_directories(self) -> None:
        """Create the output directory if it does not exist"""
        if not self.base_path.exists():
            logger.debug(f"Creating output directory: {self.base_path}")
        self.base_path.mkdir(parents=True, exist_ok=True)

    def get_artifact_path(self, file_name: str) -> Path:
        """
        Get the absolute path of an artifact inside the output directory

        Args:
            file_name: Artifact file name, optionally with subdirectories

        Returns:
            Path: Artifact path; parent directories are created
        """
        path = self.base_path / file_name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def get_csv_path(self, stem: str) -> Path:
        return self.get_artifact_path(f"{stem}.csv")

    def get_json_path(self, stem: str) -> Path:
        return self.get_artifact_path(f"{stem}.json")

    def get_plot_path(self, stem: str) -> Path:
        return self.get_artifact_path(f"{stem}.png")

    def get_snapshot_path(self, kernel_name: str, step: int) -> Path:
        """
        Get the path of a binary kernel snapshot

        Args:
            kernel_name: Kernel name (eta, sh, ch, V, ...)
            step: Time step index of the snapshot

        Returns:
            Path: Snapshot path
        """
        return self.get_artifact_path(f"snapshots/{kernel_name}_{step:06d}{self.SNAPSHOT_SUFFIX}")

    def get_log_directory(self, log_directory: str) -> Path:
        path = self.base_path / log_directory
        path.mkdir(parents=True, exist_ok=True)
        return path

    def register(self, kind: str, path: Path) -> None:
        """Record an artifact so that the manifest can list it"""
        self._written[f"{kind}:{path.name}"] = path
        logger.debug(f"Artifact written ({kind}): {path}")

    def written_artifacts(self) -> List[str]:
        """Relative paths of the artifacts registered so far, sorted"""
        names = set()
        for path in self._written.values():
            try:
                names.add(str(path.relative_to(self.base_path)))
            except ValueError:
                names.add(str(path))
        return sorted(names)

    def get_available_snapshots(self, kernel_name: Optional[str] = None) -> List[Path]:
        if not self.snapshots_path.exists():
            return []
        pattern = f"{kernel_name}_*{self.SNAPSHOT_SUFFIX}" if kernel_name else f"*{self.SNAPSHOT_SUFFIX}"
        return sorted(self.snapshots_path.glob(pattern))

    def get_resource_report(self) -> Dict[str, object]:
        """Summary of the output directory"""
        return {
            'base_path': str(self.base_path),
            'exists': self.base_path.exists(),
            'artifacts': self.written_artifacts(),
            'snapshots': len(self.get_available_snapshots()),
        }

    def __str__(self) -> str:
        return f"ResourceManager(base_path='{self.base_path}')"


# Global resource manager instance
_resource_manager = None

def get_resource_manager(output_dir: Optional[Union[str, Path]] = None) -> ResourceManager:
    """Get the global resource manager, replacing it when a new output directory is given"""
    global _resource_manager
    if _resource_manager is None or (output_dir is not None and Path(output_dir) != _resource_manager.base_path):
        _resource_manager = ResourceManager(output_dir or "out")
    return _resource_manager
