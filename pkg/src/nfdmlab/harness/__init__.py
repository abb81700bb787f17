from nfdmlab.harness.config import ExperimentConfig, load_config, preset
from nfdmlab.harness.runner import run_point, run_sweep, find_peak

__all__ = ["ExperimentConfig", "load_config", "preset",
           "run_point", "run_sweep", "find_peak"]
