"""Experiment configs, presets, the seeded runner and the command line."""

from .config import ExperimentConfig, config_from_dict, make_base, make_meta, parse_config, parse_meta
from .presets import PRESETS, preset
from .runner import RunArtifact, run_experiment, run_repetition, run_traces

__all__ = [
    "ExperimentConfig",
    "PRESETS",
    "RunArtifact",
    "config_from_dict",
    "make_base",
    "make_meta",
    "parse_config",
    "parse_meta",
    "preset",
    "run_experiment",
    "run_repetition",
    "run_traces",
]
