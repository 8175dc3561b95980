"""
Configuration Loader

Loads configuration from config.json (path overridable through the
NEWTONPOLY_CONFIG environment variable or a .env file) and resolves the
per-run RunConfig that every output file embeds.
"""

import json
import os
from dataclasses import dataclass, asdict, fields, replace
from typing import Any, Dict, Optional

from dotenv import load_dotenv

CONFIG_ENV_VAR = 'NEWTONPOLY_CONFIG'
DEFAULT_CONFIG_PATH = 'config.json'


class Config:
    """Configuration manager"""

    def __init__(self, config_path: str = DEFAULT_CONFIG_PATH):
        """Load configuration from file"""
        self.config_path = config_path
        self._config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from JSON file"""
        if not os.path.exists(self.config_path):
            raise FileNotFoundError(f"Configuration file not found: {self.config_path}")

        with open(self.config_path, 'r', encoding='utf-8') as f:
            return json.load(f)

    def get(self, key_path: str, default=None):
        """
        Get configuration value using dot notation

        Args:
            key_path: Path to config key (e.g., 'decay.xi_min')
            default: Default value if key not found

        Returns:
            Configuration value
        """
        keys = key_path.split('.')
        value = self._config

        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default

        return value

    def get_all(self) -> Dict[str, Any]:
        """Get entire configuration"""
        return self._config.copy()

    # Polynomial
    @property
    def poly(self) -> str:
        return self.get('polynomial.poly', 'x1^2+x2^2+x3^2')

    @property
    def nvars(self) -> int:
        return int(self.get('polynomial.nvars', 3))

    # Advisory checks
    @property
    def convexity_radius(self) -> float:
        return float(self.get('checks.convexity_radius', 0.5))

    @property
    def convexity_grid(self) -> int:
        return int(self.get('checks.convexity_grid', 9))

    @property
    def line_directions(self) -> int:
        return int(self.get('checks.line_directions', 64))

    # Height search
    @property
    def height_starts(self) -> int:
        return int(self.get('height.starts', 64))

    @property
    def height_iters(self) -> int:
        return int(self.get('height.iters', 40))

    @property
    def height_prune_tol(self) -> float:
        return float(self.get('height.prune_tol', 1e-10))

    # Surface patch
    @property
    def bump_radius(self) -> float:
        return float(self.get('surface.bump_radius', 0.5))

    @property
    def bump_kind(self) -> str:
        return self.get('surface.bump_kind', 'smooth_exp')

    @property
    def bump_power(self) -> int:
        return int(self.get('surface.bump_power', 2))

    @property
    def include_area_factor(self) -> bool:
        return bool(self.get('surface.include_area_factor', True))

    # Quadrature
    @property
    def budget(self) -> int:
        return int(self.get('quadrature.budget', 200_000_000))

    @property
    def nodes_per_wavelength(self) -> float:
        return float(self.get('quadrature.nodes_per_wavelength', 4.0))

    @property
    def quadrature_rel_tol(self) -> float:
        return float(self.get('quadrature.rel_tol', 1e-6))

    # Decay fit
    @property
    def xi_min(self) -> float:
        return float(self.get('decay.xi_min', 8.0))

    @property
    def xi_max(self) -> float:
        return float(self.get('decay.xi_max', 512.0))

    @property
    def n_mags(self) -> int:
        return int(self.get('decay.mags', 8))

    @property
    def n_dirs(self) -> int:
        return int(self.get('decay.dirs', 9))

    @property
    def max_tilt(self) -> float:
        return float(self.get('decay.max_tilt', 0.1))

    @property
    def conformance_slack(self) -> float:
        return float(self.get('decay.conformance_slack', 0.15))

    # Knapp scans
    @property
    def delta_min(self) -> float:
        return float(self.get('knapp.delta_min', 2.0 ** -11))

    @property
    def delta_max(self) -> float:
        return float(self.get('knapp.delta_max', 2.0 ** -4))

    @property
    def n_scales(self) -> int:
        return int(self.get('knapp.scales', 8))

    @property
    def cap_constant(self) -> float:
        return float(self.get('knapp.cap_constant', 0.125))

    @property
    def verdict_threshold(self) -> float:
        return float(self.get('knapp.verdict_threshold', 0.02))

    @property
    def p_offset(self) -> str:
        return str(self.get('knapp.p_offset', '1/10'))

    # Workflow
    @property
    def seed(self) -> int:
        return int(self.get('workflow.seed', 0))

    @property
    def workers(self) -> int:
        return int(self.get('workflow.workers', 1))

    @property
    def output_dir(self) -> str:
        return self.get('workflow.output_dir', 'output')

    # Logging
    @property
    def log_level(self) -> str:
        return self.get('logging.level', 'INFO')

    @property
    def log_format(self) -> str:
        return self.get('logging.format', '%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    @property
    def log_file(self) -> str:
        return self.get('logging.file', 'logs/newtonpoly.log')

    @property
    def log_console(self) -> bool:
        return self.get('logging.console', True)


# ============================================================================
# RUN CONFIG
# ============================================================================

@dataclass(frozen=True)
class RunConfig:
    """Resolved settings of one run; echoed into every output file"""
    poly: str = 'x1^2+x2^2+x3^2'
    nvars: int = 3
    convexity_radius: float = 0.5
    convexity_grid: int = 9
    line_directions: int = 64
    starts: int = 64
    iters: int = 40
    height_prune_tol: float = 1e-10
    h_override: Optional[str] = None
    bump_radius: float = 0.5
    bump_kind: str = 'smooth_exp'
    bump_power: int = 2
    include_area_factor: bool = True
    budget: int = 200_000_000
    nodes_per_wavelength: float = 4.0
    quadrature_rel_tol: float = 1e-6
    xi_min: float = 8.0
    xi_max: float = 512.0
    n_mags: int = 8
    n_dirs: int = 9
    max_tilt: float = 0.1
    conformance_slack: float = 0.15
    delta_min: float = 2.0 ** -11
    delta_max: float = 2.0 ** -4
    n_scales: int = 8
    cap_constant: float = 0.125
    verdict_threshold: float = 0.02
    p_offset: str = '1/10'
    p: Optional[str] = None
    seed: int = 0
    workers: int = 1
    output_dir: str = 'output'

    # Excluded from the echo: output files must not depend on parallelism or location
    NOT_ECHOED = ('workers', 'output_dir')

    @classmethod
    def from_config(cls, config: Config, **overrides) -> "RunConfig":
        """Config file values, then non-None overrides (CLI flags win)"""
        base = {f.name: getattr(config, f.name) for f in fields(cls) if hasattr(Config, f.name)}
        base['starts'] = config.height_starts
        base['iters'] = config.height_iters
        run = cls(**base)
        known = {f.name for f in fields(cls)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"Unknown run settings: {sorted(unknown)}")
        return replace(run, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key in self.NOT_ECHOED:
            data.pop(key, None)
        return data


# Global config instance
_config_instance = None


def load_config(config_path: Optional[str] = None) -> Config:
    """Load configuration (singleton pattern); NEWTONPOLY_CONFIG overrides the default path"""
    global _config_instance
    if _config_instance is None:
        load_dotenv()
        path = config_path or os.getenv(CONFIG_ENV_VAR, DEFAULT_CONFIG_PATH)
        _config_instance = Config(path)
    return _config_instance


def get_config() -> Config:
    """Get current configuration instance"""
    global _config_instance
    if _config_instance is None:
        return load_config()
    return _config_instance


def reset_config():
    """Drop the cached instance (tests load several files)"""
    global _config_instance
    _config_instance = None
