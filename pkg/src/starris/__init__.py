"""Sum-rate maximization for mode-switching STAR-RIS uplinks."""

from .bcd import Scheme, SolveReport, bcd_solve, initialize, run_scheme
from .model import Auxiliaries, StarConfig, fp_objective, sum_rate, update_auxiliaries
from .scenario import ChannelSet, SystemConfig, draw_channels, place_users

__all__ = [
    "Auxiliaries",
    "ChannelSet",
    "Scheme",
    "SolveReport",
    "StarConfig",
    "SystemConfig",
    "bcd_solve",
    "draw_channels",
    "fp_objective",
    "initialize",
    "place_users",
    "run_scheme",
    "sum_rate",
    "update_auxiliaries",
]
