"""
Configuration Management for Pruning Experiments
================================================

Handles loading, overriding and validating experiment configuration.
A JSON file is deep-merged over the built-in defaults; values are addressed
with dot notation ('pruning.max_prune_fraction').
"""

import copy
import json
import os
from pathlib import Path
from typing import Dict, Any, List, Optional
import logging

import jsonschema

try:
    from dotenv import load_dotenv
    DOTENV_AVAILABLE = True
except ImportError:
    DOTENV_AVAILABLE = False

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "ESN_OUTPUT_DIR"

MEASURE_NAMES = ["C_in", "C_out", "C1", "C2", "C3"]

EXPERIMENT_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["dataset", "splits", "reservoir", "pruning", "evaluation", "experiment", "paths"],
    "properties": {
        "dataset": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["mackey-glass", "csv", "synth-load"]},
                "n_samples": {"type": "integer", "minimum": 100},
                "alpha": {"type": "number", "exclusiveMinimum": 0},
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "subsample": {"type": "integer", "minimum": 1},
                "initial_value": {"type": "number"},
                "path": {"type": ["string", "null"]},
                "column": {"type": ["string", "integer"]},
                "has_header": {"type": "boolean"},
                "seed": {"type": "integer", "minimum": 0},
                "daily_period": {"type": "integer", "minimum": 1},
                "weekly_period": {"type": "integer", "minimum": 1},
                "noise_std": {"type": "number", "minimum": 0},
                "trend": {"type": "number"},
            },
        },
        "splits": {
            "type": "object",
            "properties": {
                "washout_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "train_fraction": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "val_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "test_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
        },
        "reservoir": {
            "type": "object",
            "properties": {
                "connectivity": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "spectral_radius": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "input_scaling": {"type": "number", "exclusiveMinimum": 0},
                "input_bias": {"type": "number", "minimum": 0},
                "ridge_lambda": {"type": "number", "minimum": 0},
                "feedback_enabled": {"type": "boolean"},
            },
        },
        "pruning": {
            "type": "object",
            "properties": {
                "step": {"type": ["integer", "null"], "minimum": 1},
                "max_prune_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "recompute_each_step": {"type": "boolean"},
                "esp_guard": {"type": "boolean"},
                "rank_by_magnitude": {"type": "boolean"},
            },
        },
        "evaluation": {
            "type": "object",
            "properties": {
                "horizon": {"type": "integer", "minimum": 1},
                "trajectory_nrmse": {"type": "boolean"},
                "eval_stride": {"type": "integer", "minimum": 1},
            },
        },
        "experiment": {
            "type": "object",
            "properties": {
                "measures": {"type": "array", "minItems": 1, "items": {"enum": MEASURE_NAMES}},
                "reservoir_sizes": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 2}},
                "n_reps": {"type": "integer", "minimum": 1},
                "base_seed": {"type": "integer", "minimum": 0},
                "workers": {"type": "integer", "minimum": 1},
                "plot": {"type": "boolean"},
            },
        },
        "paths": {
            "type": "object",
            "required": ["output_dir"],
            "properties": {"output_dir": {"type": "string", "minLength": 1}},
        },
        "logging": {
            "type": "object",
            "properties": {"level": {"type": "string"}, "format": {"type": "string"}},
        },
    },
}


class ConfigError(ValueError):
    """Raised for unreadable, malformed or invalid configuration"""


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


class Config:
    """Configuration manager for pruning experiments"""

    def __init__(self, config_path: Optional[str] = None, env_file: Optional[str] = None):
        """
        Initialize configuration

        Args:
            config_path: Path to a JSON configuration file; defaults only when None
            env_file: Optional .env file read before environment overrides
        """
        self.config_path = Path(config_path) if config_path is not None else None
        self.errors: List[str] = []
        self._load_env_file(env_file)
        self.config = _deep_merge(self._get_default_config(), self._load_config())
        self._apply_environment()

    def _load_env_file(self, env_file: Optional[str]):
        """Load environment variables from a .env file"""
        if not DOTENV_AVAILABLE:
            return
        if env_file is not None:
            env_path = Path(env_file)
            if not env_path.exists():
                raise ConfigError(f"Specified .env file not found: {env_path}")
            load_dotenv(env_path, override=True)
            logger.info(f"Loaded environment variables from: {env_path}")
            return

        project_env = Path(__file__).parent.parent / ".env"
        if project_env.exists():
            load_dotenv(project_env, override=False)
            logger.info(f"Loaded environment variables from: {project_env}")

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from file"""
        if self.config_path is None:
            return {}
        if not self.config_path.exists():
            raise ConfigError(f"Config file not found: {self.config_path}")
        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                loaded = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {self.config_path} is not valid JSON: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError(f"Config file {self.config_path} must contain a JSON object")
        logger.info(f"Loaded configuration from: {self.config_path}")
        return loaded

    def _apply_environment(self):
        output_dir = os.getenv(OUTPUT_DIR_ENV)
        if output_dir:
            self.config["paths"]["output_dir"] = output_dir
            logger.info(f"Output directory overridden by {OUTPUT_DIR_ENV}: {output_dir}")

    def _get_default_config(self) -> Dict[str, Any]:
        """Get default configuration"""
        return {
            "dataset": {
                "kind": "mackey-glass",
                "n_samples": 10000,
                "alpha": 17.0,
                "dt": 0.1,
                "subsample": 10,
                "initial_value": 1.2,
                "path": None,
                "column": 0,
                "has_header": True,
                "seed": 0,
                "daily_period": 24,
                "weekly_period": 168,
                "noise_std": 0.1,
                "trend": 0.0
            },
            "splits": {
                "washout_fraction": 0.1,
                "train_fraction": 0.7,
                "val_fraction": 0.1,
                "test_fraction": 0.1
            },
            "reservoir": {
                "connectivity": 0.1,
                "spectral_radius": 0.9,
                "input_scaling": 0.2,
                "input_bias": 0.2,
                "ridge_lambda": 1e-6,
                "feedback_enabled": False
            },
            "pruning": {
                "step": None,
                "max_prune_fraction": 0.4,
                "recompute_each_step": True,
                "esp_guard": True,
                "rank_by_magnitude": False
            },
            "evaluation": {
                "horizon": 84,
                "trajectory_nrmse": False,
                "eval_stride": 5
            },
            "experiment": {
                "measures": ["C_in", "C_out", "C1", "C2", "C3"],
                "reservoir_sizes": [200, 300],
                "n_reps": 10,
                "base_seed": 42,
                "workers": 1,
                "plot": False
            },
            "paths": {
                "output_dir": "output"
            },
            "logging": {
                "level": "INFO",
                "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
            }
        }

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation

        Args:
            key_path: Configuration key path (e.g., 'pruning.step')
            default: Default value if key not found

        Returns:
            Configuration value
        """
        keys = key_path.split('.')
        value = self.config

        try:
            for key in keys:
                value = value[key]
            return value
        except (KeyError, TypeError):
            logger.warning(f"Configuration key not found: {key_path}")
            return default

    def set(self, key_path: str, value: Any) -> None:
        """
        Set configuration value using dot notation

        Args:
            key_path: Configuration key path
            value: Value to set
        """
        keys = key_path.split('.')
        config_section = self.config

        # Navigate to the parent of the target key
        for key in keys[:-1]:
            if key not in config_section or not isinstance(config_section[key], dict):
                config_section[key] = {}
            config_section = config_section[key]

        config_section[keys[-1]] = value
        logger.info(f"Set configuration: {key_path} = {value}")

    def apply_override(self, assignment: str) -> None:
        """
        Apply a 'key.path=value' override

        The value is parsed as JSON ('0.3', 'true', '[200, 300]'); anything
        that is not valid JSON is stored as a plain string.
        """
        if '=' not in assignment:
            raise ConfigError(f"Override must look like key=value, got '{assignment}'")
        key_path, raw = assignment.split('=', 1)
        key_path = key_path.strip()
        if not key_path:
            raise ConfigError(f"Override has an empty key: '{assignment}'")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        self.set(key_path, value)

    def save(self, path: Optional[str] = None) -> Path:
        """Save configuration to file"""
        target = Path(path) if path is not None else self.config_path
        if target is None:
            raise ConfigError("No path given to save the configuration")
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, 'w', encoding='utf-8') as f:
            json.dump(self.config, f, indent=2)
        logger.info(f"Saved configuration to: {target}")
        return target

    def validate(self) -> bool:
        """
        Validate configuration against EXPERIMENT_SCHEMA and cross-field rules

        Returns:
            True if configuration is valid; messages are kept in self.errors
        """
        validator = jsonschema.Draft7Validator(EXPERIMENT_SCHEMA)
        self.errors = [
            f"{'.'.join(str(p) for p in error.path) or '<root>'}: {error.message}"
            for error in sorted(validator.iter_errors(self.config), key=lambda e: [str(p) for p in e.path])
        ]

        splits = self.config.get("splits", {})
        fractions = [splits.get(k) for k in ("washout_fraction", "train_fraction", "val_fraction", "test_fraction")]
        if all(isinstance(f, (int, float)) for f in fractions) and abs(sum(fractions) - 1.0) > 1e-9:
            self.errors.append(f"splits: fractions must sum to 1, got {sum(fractions)}")

        dataset = self.config.get("dataset", {})
        if dataset.get("kind") == "csv":
            path = dataset.get("path")
            if not path:
                self.errors.append("dataset.path: required for csv datasets")
            elif not Path(path).exists():
                self.errors.append(f"dataset.path: file not found: {path}")

        for message in self.errors:
            logger.error(f"Invalid configuration: {message}")
        return not self.errors

    def require_valid(self) -> None:
        if not self.validate():
            raise ConfigError("; ".join(self.errors))
