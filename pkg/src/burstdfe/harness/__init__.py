"""Configuration-driven experiment runner."""

from .config import (
    EqualizerConfig,
    ExperimentConfig,
    FrameConfig,
    LinkConfig,
    SpectrumConfig,
    SweepConfig,
    apply_override,
    config_from_dict,
    config_to_dict,
    dumps_config,
    load_config,
    loads_config,
    preset_names,
    resolve_axis,
)
from .emit import RESULT_COLUMNS, emit_results
from .pipeline import ReceivedFrame, equalize, front_end, simulate_link
from .runner import PlannedRun, ResultTable, RunResult, plan_runs, run_experiment

__all__ = [
    "EqualizerConfig",
    "ExperimentConfig",
    "FrameConfig",
    "LinkConfig",
    "PlannedRun",
    "RESULT_COLUMNS",
    "ReceivedFrame",
    "ResultTable",
    "RunResult",
    "SpectrumConfig",
    "SweepConfig",
    "apply_override",
    "config_from_dict",
    "config_to_dict",
    "dumps_config",
    "emit_results",
    "equalize",
    "front_end",
    "load_config",
    "loads_config",
    "plan_runs",
    "preset_names",
    "resolve_axis",
    "run_experiment",
    "simulate_link",
]
