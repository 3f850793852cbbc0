from .network import CorridorNetwork, ConfigurationError, build_network
from .scenario import (
    ACTIONS,
    ControlAction,
    Scenario,
    action_id,
    enumerate_grid,
    incident_cell,
)
from .engine import (
    SimResult,
    TrafficState,
    LiveCorridor,
    baseline_features,
    best_action,
    simulate,
    simulate_batch,
)

__all__ = [
    "CorridorNetwork",
    "ConfigurationError",
    "build_network",
    "Scenario",
    "ControlAction",
    "ACTIONS",
    "action_id",
    "enumerate_grid",
    "incident_cell",
    "SimResult",
    "TrafficState",
    "LiveCorridor",
    "simulate",
    "simulate_batch",
    "best_action",
    "baseline_features",
]
