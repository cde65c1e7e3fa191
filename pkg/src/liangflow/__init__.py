"""Quantum Liang information flow across phase transitions in spin chains."""

from .errors import ConfigError, EngineError, LiangflowError, ResourceGuardError
from .liang import (
    Engine,
    FlowSeries,
    InitialState,
    QuenchPair,
    cumulative_flow,
    delta_S_ground,
    instantaneous_flow,
    late_time_average,
)
from .model import (
    ChainModel,
    FrozenMask,
    build_aah,
    build_annni,
    critical_field,
    fibonacci_frozen_site,
    freeze,
)

__version__ = "0.1.0"
