"""Experiment harness: episodes, Monte Carlo sweeps, estimation runs and output."""
from .config import (ABSTRACT, FULL, REQUIRED_FIELDS, SEED_ENV, ConfigError, ExperimentConfig,
                     config_from_dict, load_config, save_config)
from .episode import SimTrace, bits_at_reception, lqr_cost, run_episode
from .estimation import EstimationResult, EstimationRow, estimation_experiment
from .output import line_chart, sweep_chart, trajectory_chart, write_svg
from .sweep import (SweepResult, SweepRow, default_capacity_grid, episode_seed, monte_carlo,
                    sweep_capacity)

__all__ = [
    "ABSTRACT", "FULL", "REQUIRED_FIELDS", "SEED_ENV", "ConfigError", "ExperimentConfig",
    "config_from_dict", "load_config", "save_config", "SimTrace", "bits_at_reception",
    "lqr_cost", "run_episode", "EstimationResult", "EstimationRow", "estimation_experiment",
    "line_chart", "sweep_chart", "trajectory_chart", "write_svg", "SweepResult", "SweepRow",
    "default_capacity_grid", "episode_seed", "monte_carlo", "sweep_capacity",
]
