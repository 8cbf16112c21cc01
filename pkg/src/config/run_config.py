"""
Run configuration for command-line experiments

Precedence: constructor arguments (CLI flags), then the JSON config file,
then environment variables, then defaults.
"""
import json
import os
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from src.config.analysis_config import MAX_THREADS
from src.models.errors import ConfigError
from src.models.open_system import FIELDS, FLOAT

load_dotenv()

DEFAULT_MODEL = {"chain": "xx", "L": 1, "gamma": 1}


def _first(*values):
    for value in values:
        if value is not None:
            return value
    return None


class RunConfig:
    """Resolved settings of one CLI invocation"""

    def __init__(
        self,
        config_path: str = None,
        model: Dict[str, Any] = None,
        mode: str = None,
        seed: int = None,
        threads: int = None,
        output_dir: str = None,
        tolerances: Dict[str, Any] = None,
    ):
        self.config_path = config_path
        self.file_data = self._load_file(config_path) if config_path else {}
        self.base_dir = os.path.dirname(os.path.abspath(config_path)) if config_path else None

        file_model = self.file_data.get("model") or {}
        defaults = {} if "hamiltonian" in file_model else DEFAULT_MODEL
        self.model = {**defaults, **file_model, **(model or {})}
        self.mode = _first(mode, self.file_data.get("mode"), FLOAT)
        env_seed = os.getenv("JUMPPAT_SEED")
        self.seed = _first(seed, self.file_data.get("seed"), int(env_seed) if env_seed else None)
        self.threads = int(_first(threads, self.file_data.get("threads"), MAX_THREADS))
        self.output_dir = _first(output_dir, self.file_data.get("output_dir"), os.getenv("JUMPPAT_OUTPUT_DIR"), "results")
        self.tolerances = {**self.file_data.get("tolerances", {}), **(tolerances or {})}
        self.validate()

    @staticmethod
    def _load_file(path: str) -> Dict[str, Any]:
        if not os.path.exists(path):
            raise ConfigError(f"Config file not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"Config file {path} is not valid JSON: {e}")
        if not isinstance(data, dict):
            raise ConfigError("Config file must hold a JSON object")
        return data

    def validate(self):
        if self.mode not in FIELDS:
            raise ConfigError(f"mode must be one of {FIELDS}, got {self.mode!r}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.seed is not None:
            try:
                self.seed = int(self.seed)
            except (TypeError, ValueError):
                raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if self.base_dir and "hamiltonian" in self.model:
            paths = [self.model["hamiltonian"]] + [
                entry["path"] if isinstance(entry, dict) else entry
                for entry in (self.model.get("jumps") or {}).values()
            ]
            for path in paths:
                full = path if os.path.isabs(path) else os.path.join(self.base_dir, path)
                if not os.path.exists(full):
                    raise ConfigError(f"Referenced matrix file not found: {full}")

    def command(self, name: str, overrides: Dict[str, Any] = None) -> Dict[str, Any]:
        """Command section from the file with non-None overrides applied"""
        section = dict(self.file_data.get(name) or {})
        for key, value in (overrides or {}).items():
            if value is not None:
                section[key] = value
        return section

    def tolerance(self, name: str, default):
        return self.tolerances.get(name, default)

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("This command is stochastic: pass --seed or set 'seed' in the config")
        return self.seed

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model,
            "mode": self.mode,
            "seed": self.seed,
            "threads": self.threads,
            "output_dir": self.output_dir,
            "tolerances": self.tolerances,
        }


def load_run_config(path: Optional[str] = None, **overrides) -> RunConfig:
    return RunConfig(config_path=path, **overrides)
