"""HTTP service exposing evaluation, sweeps and the complexity model."""

from .app import create_app
from .ops import run_complexity, run_eval, run_sweep

__all__ = ["create_app", "run_complexity", "run_eval", "run_sweep"]
