"""Run configuration loading, validation and provenance echo."""

import json
import logging
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import ValidationError

from seqfold import __version__
from seqfold.models.settings import RunConfig
from seqfold.utils.exceptions import ConfigError
from seqfold.utils.xdg import XDGPaths

CONFIG_ENV = "SEQFOLD_CONFIG"
DEFAULT_CONFIG_NAME = "config.json"
EFFECTIVE_CONFIG = "effective_config.json"
RUN_INFO = "run_info.json"


def describe_validation_error(error: ValidationError) -> str:
    """One line per problem, each naming the dotted key."""
    lines = []
    for item in error.errors():
        key = ".".join(str(part) for part in item["loc"]) or "<root>"
        if item["type"] == "extra_forbidden":
            lines.append(f"{key}: unknown key")
        else:
            lines.append(f"{key}: {item['msg']}")
    return "\n".join(lines)


class ConfigManager:
    """Loads one JSON run configuration."""

    def __init__(self, path: Optional[Union[str, Path]] = None) -> None:
        """Initialize the configuration manager.

        Args:
            path: Config file; falls back to ``$SEQFOLD_CONFIG`` and then
                ``config.json`` in the XDG config directories
        """
        self.logger = logging.getLogger(__name__)
        self.xdg = XDGPaths()
        self._path = Path(path) if path is not None else None
        self._settings: Optional[RunConfig] = None

        self.logger.debug("Configuration manager initialized")

    @property
    def path(self) -> Optional[Path]:
        """Config file in use, or None when running on defaults."""
        if self._path is not None:
            return self._path
        env_path = os.environ.get(CONFIG_ENV)
        if env_path:
            return Path(env_path)
        return self.xdg.find_config_file(DEFAULT_CONFIG_NAME)

    @property
    def settings(self) -> RunConfig:
        """Get the run configuration.

        Raises:
            ConfigError: If the file cannot be read or validated
        """
        if self._settings is None:
            self._settings = self._load_settings()
        return self._settings

    def _read(self, path: Path) -> Dict[str, Any]:
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"Config file not found: {path}")
        except (OSError, ValueError) as e:
            error_msg = f"Error reading config file: {path}"
            self.logger.error(f"{error_msg}: {str(e)}")
            raise ConfigError(error_msg, detail=str(e))
        if not isinstance(data, dict):
            raise ConfigError(
                f"Config file must hold a JSON object: {path}",
                detail=f"found {type(data).__name__}",
            )
        return data

    def _load_settings(self) -> RunConfig:
        path = self.path
        data: Dict[str, Any] = {}
        if path is None:
            self.logger.debug("No config file found, using defaults")
        else:
            self.logger.debug(f"Reading config file: {path}")
            data = self._read(path)

        try:
            settings = RunConfig.model_validate(data)
        except ValidationError as e:
            error_msg = f"Invalid configuration in {path or 'defaults'}"
            detail = describe_validation_error(e)
            self.logger.error(f"{error_msg}: {detail}")
            raise ConfigError(error_msg, detail=detail)
        self.logger.info("Settings loaded and validated successfully")
        return settings

    def override_seed(self, seed: Optional[int]) -> RunConfig:
        """Replace the data, train and eval seeds with ``seed``."""
        settings = self.settings
        if seed is None:
            return settings
        self._settings = settings.model_copy(
            update={
                "data": settings.data.model_copy(update={"base_seed": seed}),
                "train": settings.train.model_copy(update={"seed": seed}),
                "eval": settings.eval.model_copy(update={"seed": seed}),
            }
        )
        self.logger.debug(f"Seeds overridden with {seed}")
        return self._settings

    def show_config(self) -> Dict[str, Any]:
        """Get the effective configuration as a dictionary."""
        return self.settings.model_dump(mode="json")

    def echo(
        self,
        out_dir: Union[str, Path],
        seed: Optional[int] = None,
        subcommand: str = "",
    ) -> Path:
        """Write the effective config and run info next to run outputs.

        Raises:
            ConfigError: If the output directory is not writable
        """
        out_dir = Path(out_dir)
        info = {
            "seed": seed,
            "version": __version__,
            "subcommand": subcommand,
            "config_path": str(self.path) if self.path else None,
            "started": datetime.now(timezone.utc).isoformat(),
        }
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / EFFECTIVE_CONFIG).write_text(
                json.dumps(self.show_config(), indent=2, sort_keys=True)
            )
            (out_dir / RUN_INFO).write_text(json.dumps(info, indent=2))
        except OSError as e:
            error_msg = f"Failed to write provenance files to {out_dir}"
            self.logger.error(f"{error_msg}: {str(e)}")
            raise ConfigError(error_msg, detail=str(e))
        self.logger.debug(f"Echoed effective configuration to {out_dir}")
        return out_dir / EFFECTIVE_CONFIG


def load_config(path: Union[str, Path]) -> RunConfig:
    """Parse, default and validate the config at ``path``."""
    return ConfigManager(path).settings
