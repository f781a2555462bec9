from .config import ConfigError, MaskSpec, Policy, RunConfig, load_config, parse_config
from .metrics import compute_bpp, compute_mse, mse_per_level, rate_reduction_pct
from .records import COLUMNS, MeasurementRecord, read_records
from .runner import run_matrix, smallest_admissible_at_least
from .summary import figure_datasets, summarize

__all__ = [
    "COLUMNS",
    "ConfigError",
    "MaskSpec",
    "MeasurementRecord",
    "Policy",
    "RunConfig",
    "compute_bpp",
    "compute_mse",
    "figure_datasets",
    "load_config",
    "mse_per_level",
    "parse_config",
    "rate_reduction_pct",
    "read_records",
    "run_matrix",
    "smallest_admissible_at_least",
    "summarize",
]
