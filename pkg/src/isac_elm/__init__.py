"""ELM-based channel estimation for IRS-assisted multi-user ISAC systems."""

from .config import SystemConfig, profile_config
from .errors import (ConfigError, DegenerateInputError, DependencyError, InvalidArgumentError,
                     NumericError, RankDeficiencyError)

__version__ = "0.1.0"

__all__ = [
    "SystemConfig", "profile_config", "ConfigError", "DegenerateInputError", "DependencyError",
    "InvalidArgumentError", "NumericError", "RankDeficiencyError", "__version__",
]
