"""Stage learning in large anonymous games."""

from ._core import (
    ConfigError,
    Game,
    abr_containment_threshold,
    close_l1_bound,
    config_entries,
    contribution_cost,
    contribution_utility,
    l1_distance,
    run,
    sweep,
)

__all__ = [
    "ConfigError",
    "Game",
    "abr_containment_threshold",
    "close_l1_bound",
    "config_entries",
    "contribution_cost",
    "contribution_utility",
    "l1_distance",
    "run",
    "sweep",
]
