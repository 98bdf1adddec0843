from .config import Algorithm, ConfigError, ExperimentConfig, apply_overrides, load_config
from .runner import RunTrace, run, run_as3, run_as3_fixed, run_baseline, run_experiment, trial_streams
from .stats import mann_whitney_u, median_iqr
from .export import ExportError, export, load_rows
