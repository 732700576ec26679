"""Configuration management for otfmri runs"""

import copy
import json
import os
from typing import Any, Dict, List, Optional

from ..utils.error_handler import ConfigurationError, OTFmriError
from ..utils.logger import LoggerMixin

VALID_LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')
EXPORT_FORMATS = ('CSV', 'Excel')
DEFAULT_CONFIG_PATH = "./config/settings.json"


class ConfigManager(LoggerMixin):
    """Run configuration with nested key support

    A configuration file is deep-merged over ``DEFAULT_CONFIG``. Without an
    explicit path, ``./config/settings.json`` is read when it exists. Keys
    that do not exist in the defaults are rejected.
    """

    DEFAULT_CONFIG = {
        "run": {
            "seed": 0,
            "out_dir": "./runs/latest",
            "force": False
        },
        "synth": {
            "vertex_count": 1024,
            "n_images": 70,
            "n_subjects_low": 9,
            "n_subjects_high": 8,
            "trials_per_image_low": 10,
            "trials_per_image_high": 3,
            "latent_dim_visual": 8,
            "latent_dim_semantic": 8,
            "noise_sigma_high": 0.05,
            "subject_offset_sigma": 0.1,
            "encoding_smoothness_fwhm": 6.0,
            "degradation": {
                "blur_fwhm_vertices": 4.0,
                "gain": 1.5,
                "bias": 0.5,
                "noise_sigma_low": 0.05
            }
        },
        "data": {
            "low_manifest": None,
            "high_manifest": None,
            "enhanced_manifest": None,
            "ground_truth": None,
            "latent_targets": None
        },
        "split": {
            "train_subjects_low": None,
            "train_subjects_high": None,
            "test_subjects_low": None
        },
        "train": {
            "divergence_weight": 1.0,
            "critic_steps_per_gen": 5,
            "generator_lr": 1e-4,
            "critic_lr": 1e-4,
            "betas": [0.5, 0.9],
            "gradient_penalty": 10.0,
            "batch_size": 16,
            "max_steps": 5000,
            "checkpoint_interval": 500,
            "log_interval": 100,
            "depth": 4,
            "base_width": 16,
            "reduction": 4,
            "critic_stages": 4,
            "critic_base_width": 16,
            "critic_pool_length": 16,
            "critic_hidden": 64
        },
        "enhance": {
            "checkpoint": None,
            "manifest": None,
            "name": "enhanced"
        },
        "regression": {
            "alpha_grid": [0.01, 0.1, 1.0, 10.0, 100.0, 1000.0],
            "folds": 5,
            "heads_dir": None,
            "predict_manifest": None
        },
        "metrics": {
            "reference": None,
            "candidates": []
        },
        "export": {
            "format": "CSV",
            "default_path": "./exports/"
        },
        "logging": {
            "level": "INFO",
            "file_path": "./logs/otfmri.log",
            "max_file_size": "10MB",
            "backup_count": 5
        }
    }

    def __init__(self, config_path: Optional[str] = None):
        if config_path is None and os.path.exists(DEFAULT_CONFIG_PATH):
            config_path = DEFAULT_CONFIG_PATH
        self.config_path = config_path
        self.config = self.load_config()

    def load_config(self) -> Dict[str, Any]:
        """Load configuration from file, or the defaults when there is none"""
        defaults = copy.deepcopy(self.DEFAULT_CONFIG)
        if self.config_path is None:
            return defaults
        if not os.path.exists(self.config_path):
            raise ConfigurationError(f"config file not found: {self.config_path}")

        try:
            with open(self.config_path, 'r') as f:
                loaded_config = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"config file {self.config_path} is not valid JSON: {e}") from e
        if not isinstance(loaded_config, dict):
            raise ConfigurationError(f"config file {self.config_path} must hold a JSON object")

        unknown = self._unknown_keys(self.DEFAULT_CONFIG, loaded_config)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
        self.logger.debug(f"Loaded configuration from {self.config_path}")
        return self._merge_configs(defaults, loaded_config)

    @classmethod
    def _unknown_keys(cls, default: Dict[str, Any], loaded: Dict[str, Any],
                      prefix: str = "") -> List[str]:
        unknown = []
        for key, value in loaded.items():
            dotted = f"{prefix}{key}"
            if key not in default:
                unknown.append(dotted)
            elif isinstance(default[key], dict):
                if not isinstance(value, dict):
                    unknown.append(f"{dotted} (expected a section)")
                else:
                    unknown += cls._unknown_keys(default[key], value, dotted + ".")
        return unknown

    def _merge_configs(self, default: Dict[str, Any], loaded: Dict[str, Any]) -> Dict[str, Any]:
        """Merge loaded config with defaults (deep merge)"""
        result = copy.deepcopy(default)

        for key, value in loaded.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._merge_configs(result[key], value)
            else:
                result[key] = value

        return result

    def save_config(self, path: Optional[str] = None) -> str:
        """Write the current configuration as JSON, by default over the loaded file"""
        path = path or self.config_path
        if path is None:
            raise ConfigurationError("no path to save the configuration to")
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w') as f:
            json.dump(self.config, f, indent=2)
        self.logger.info(f"Configuration saved to {path}")
        return path

    def get(self, key: str, default=None) -> Any:
        """Get configuration value with dot notation support

        Examples:
            config.get('train.max_steps')
            config.get('synth.degradation.gain')
        """
        keys = key.split('.')
        value = self.config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    def set(self, key: str, value: Any):
        """Set an existing configuration value with dot notation support"""
        keys = key.split('.')
        config = self.config

        for k in keys[:-1]:
            if not isinstance(config.get(k), dict):
                raise ConfigurationError(f"unknown config key: {key}")
            config = config[k]

        if keys[-1] not in config:
            raise ConfigurationError(f"unknown config key: {key}")
        config[keys[-1]] = value

    def apply_overrides(self, overrides: Dict[str, Any]):
        """Apply dotted-key overrides such as command-line flags; ``None`` values are skipped"""
        for key, value in overrides.items():
            if value is not None:
                self.set(key, value)

    def get_section(self, section: str) -> Dict[str, Any]:
        """Get entire configuration section"""
        return copy.deepcopy(self.config.get(section, {}))

    def validate_config(self) -> bool:
        """Check value ranges; raises ConfigurationError listing every problem"""
        problems = []
        try:
            self.synth_config()
        except OTFmriError as e:
            problems.append(f"synth: {e}")
        try:
            self.train_config()
        except OTFmriError as e:
            problems.append(f"train: {e}")

        seed = self.get('run.seed')
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            problems.append(f"run.seed must be a non-negative integer, got {seed!r}")

        grid = self.get('regression.alpha_grid')
        if not isinstance(grid, list) or not grid or \
                any(isinstance(a, bool) or not isinstance(a, (int, float)) or a <= 0 for a in grid):
            problems.append(f"regression.alpha_grid must list positive numbers, got {grid!r}")
        folds = self.get('regression.folds')
        if isinstance(folds, bool) or not isinstance(folds, int) or folds < 2:
            problems.append(f"regression.folds must be an integer >= 2, got {folds!r}")

        if self.get('export.format') not in EXPORT_FORMATS:
            problems.append(f"export.format must be one of {EXPORT_FORMATS}")
        if self.get('logging.level') not in VALID_LOG_LEVELS:
            problems.append(f"logging.level must be one of {VALID_LOG_LEVELS}")

        for role in ('train_subjects_low', 'train_subjects_high', 'test_subjects_low'):
            subjects = self.get(f'split.{role}')
            if subjects is not None and (not isinstance(subjects, list)
                                         or not all(isinstance(s, str) for s in subjects)):
                problems.append(f"split.{role} must be a list of subject ids or null")

        if problems:
            for problem in problems:
                self.logger.error(f"Invalid configuration: {problem}")
            raise ConfigurationError("; ".join(problems))
        return True

    def synth_config(self):
        """SynthConfig for this run, seeded from ``run.seed``"""
        from ..synth.models import SynthConfig
        values = self.get_section('synth')
        return SynthConfig(encoding_seed=self.get('run.seed'), **values)

    def train_config(self):
        """TrainConfig for this run, seeded from ``run.seed``"""
        from ..otgan.models import TrainConfig
        values = self.get_section('train')
        values['seed'] = self.get('run.seed')
        return TrainConfig.from_dict(values)

    def get_logging_config(self) -> Dict[str, Any]:
        """Get logging configuration section"""
        return self.get_section('logging')

    def get_export_config(self) -> Dict[str, Any]:
        """Get export configuration section"""
        return self.get_section('export')

    def __repr__(self):
        return f"ConfigManager(config_path='{self.config_path}')"


def create_config_manager(config_path: Optional[str] = None) -> ConfigManager:
    """Factory function to create config manager"""
    return ConfigManager(config_path)
