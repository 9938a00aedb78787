"""Adaptive APF-PPC reduced-attitude controller with forbidden-zone, rate and
prescribed-performance constraints, plus a simulation harness."""

from .errors import (
    ConfigInvalid,
    ConstraintViolation,
    EnvelopeViolated,
    NonFiniteState,
    OutsideDomain,
    RateLimitViolated,
    UnknownPreset,
)
from .scenario import ScenarioConfig, load_config, preset, sample_target, save_config
from .sim import RunSummary, monte_carlo, run

__version__ = "0.1.0"

__all__ = [
    "ConfigInvalid",
    "ConstraintViolation",
    "EnvelopeViolated",
    "NonFiniteState",
    "OutsideDomain",
    "RateLimitViolated",
    "UnknownPreset",
    "RunSummary",
    "ScenarioConfig",
    "load_config",
    "monte_carlo",
    "preset",
    "run",
    "sample_target",
    "save_config",
]
