from .config import SweepConfig, load_config, parse_config, parse_grid
from .experiments import run_experiment
from .lightcone import LightconeFit, fit_lightcone_velocity
from .table import COLUMNS, ResultTable, Row, emit_csv, to_csv

__all__ = [
    "COLUMNS",
    "LightconeFit",
    "ResultTable",
    "Row",
    "SweepConfig",
    "emit_csv",
    "fit_lightcone_velocity",
    "load_config",
    "parse_config",
    "parse_grid",
    "run_experiment",
    "to_csv",
]
