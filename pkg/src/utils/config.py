#!/usr/bin/env python3
"""
Configuration management for the FvK plate toolkit

Holds the fully resolved run configuration (defaults merged with the values
of a problem file) and renders it back as the sectioned echo written next to
every run's outputs.
"""

import copy
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..core.errors import ExportError


GROWTH_KEYS = [f"{name}_{a}{b}" for name in ('eps', 'kappa') for a in range(1, 4) for b in range(1, 4)]


class Config:
    """Resolved run configuration with dot-notation access"""

    DEFAULT_CONFIG = {
        "grid": {
            "x_min": 0.0,
            "x_max": 1.0,
            "y_min": 0.0,
            "y_max": 1.0,
            "nx": 33,
            "ny": 33
        },
        "material": {
            "mu": 1.0,
            "lambda": 1.0
        },
        "thickness": {
            "g1": "0.5",
            "g2": "0.5"
        },
        "growth": {key: "0" for key in GROWTH_KEYS},
        "displacement": {
            "w1": "0",
            "w2": "0",
            "v": "0"
        },
        "solver": {
            "max_iters": 500,
            "grad_tol": 1e-6,
            "memory": 10,
            "armijo": 1e-4,
            "backtrack": 0.5,
            "max_backtracks": 40,
            "init_amplitude": 1e-2,
            "init": "random",
            "seed": 0,
            "n_tests": 20
        },
        "gamma": {
            "h_list": [0.08, 0.04, 0.02, 0.01],
            "n_inplane": 0,
            "n_thickness": 4,
            "threads": 1
        }
    }

    def __init__(self, values: Optional[Dict[str, Dict[str, Any]]] = None):
        """Initialize configuration

        Args:
            values: Section -> key -> value overrides merged onto the defaults
        """
        self._config = copy.deepcopy(self.DEFAULT_CONFIG)
        if values:
            self._merge_config(self._config, values)

    def get(self, key_path: str, default: Any = None) -> Any:
        """Get configuration value using dot notation

        Args:
            key_path: Dot-separated path (e.g., 'solver.grad_tol')
            default: Default value if key not found

        Returns:
            Configuration value
        """
        value = self._config
        try:
            for key in key_path.split('.'):
                value = value[key]
            return value
        except (KeyError, TypeError):
            return default

    def set(self, key_path: str, value: Any):
        """Set configuration value using dot notation

        Args:
            key_path: Dot-separated path (e.g., 'solver.seed')
            value: Value to set
        """
        keys = key_path.split('.')
        target = self._config

        # Navigate to the parent dictionary
        for key in keys[:-1]:
            target = target.setdefault(key, {})

        target[keys[-1]] = value

    def section(self, name: str) -> Dict[str, Any]:
        return dict(self._config.get(name, {}))

    def get_all(self) -> Dict[str, Any]:
        """Get all configuration as dictionary"""
        return copy.deepcopy(self._config)

    @staticmethod
    def _merge_config(base: Dict[str, Any], user: Dict[str, Any]):
        """Recursively merge user config into base config"""
        for key, value in user.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                Config._merge_config(base[key], value)
            else:
                base[key] = value

    @classmethod
    def known_keys(cls) -> Dict[str, List[str]]:
        return {section: list(keys) for section, keys in cls.DEFAULT_CONFIG.items()}

    # Echo

    @staticmethod
    def format_value(value: Any) -> str:
        """Shortest text that parses back to the same value"""
        if isinstance(value, bool):
            return str(value).lower()
        if isinstance(value, float):
            return repr(value)
        if isinstance(value, (list, tuple)):
            return ", ".join(Config.format_value(v) for v in value)
        return str(value)

    def to_ini(self) -> str:
        lines: List[str] = ["# Resolved configuration (defaults filled)"]
        for section, values in self._config.items():
            lines.append("")
            lines.append(f"[{section}]")
            for key, value in values.items():
                lines.append(f"{key} = {self.format_value(value)}")
        return "\n".join(lines) + "\n"

    def save(self, path: Union[str, Path]) -> Path:
        """Write the resolved configuration as a problem file

        Raises:
            ExportError: If the file cannot be written
        """
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(self.to_ini(), encoding='utf-8')
        except OSError as e:
            raise ExportError(f"cannot write configuration echo {path}: {e}") from e
        return path

    # Convenience properties for common settings

    @property
    def seed(self) -> int:
        return self.get('solver.seed', 0)

    @seed.setter
    def seed(self, value: int):
        self.set('solver.seed', int(value))

    @property
    def threads(self) -> int:
        return self.get('gamma.threads', 1)

    @threads.setter
    def threads(self, value: int):
        self.set('gamma.threads', int(value))
