from .checks import CHECKS, CheckResult, run_checks # noqa
from .config import ExperimentConfig, load_config, read_config # noqa
from .io import emit, export_csv, load_csv # noqa
from .runner import derive_seed, oracle_values, ResultRecord, run # noqa
