from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .runner import execute_config, run_config, sweep_config, verify_config

__all__ = [
    "ConfigError", "ExperimentConfig", "load_config", "parse_config",
    "execute_config", "run_config", "sweep_config", "verify_config",
]
