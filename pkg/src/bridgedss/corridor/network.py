"""Corridor geometry and physical constants, with validation."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields
from pathlib import Path


class ConfigurationError(ValueError):
    """Raised when a corridor configuration violates an invariant."""


@dataclass(frozen=True)
class CorridorNetwork:
    bridge_length_m: float = 1000.0
    num_cells: int = 10
    lanes: int = 3
    lane_capacity_vph: float = 2000.0
    free_flow_speed_kmh: float = 80.0
    jam_density_vpkm_lane: float = 120.0
    ramp_max_flow_vph: float = 1200.0
    detour_travel_time_s: float = 850.0
    time_step_s: float = 4.5
    horizon_s: float = 3600.0

    @property
    def cell_length_m(self) -> float:
        return self.bridge_length_m / self.num_cells

    @property
    def num_steps(self) -> int:
        return int(round(self.horizon_s / self.time_step_s))

    @property
    def free_flow_speed_ms(self) -> float:
        return self.free_flow_speed_kmh / 3.6

    @property
    def cell_capacity_vph(self) -> float:
        """Nominal all-lane capacity of one cell."""
        return self.lane_capacity_vph * self.lanes

    @property
    def jam_vehicles_per_cell(self) -> float:
        return self.jam_density_vpkm_lane * self.lanes * self.cell_length_m / 1000.0

    @property
    def ramp_cell(self) -> int:
        """Cell where the on-ramp merges (near the bridge entrance)."""
        return max(1, self.num_cells // 5)

    @property
    def free_flow_time_s(self) -> float:
        return self.bridge_length_m / self.free_flow_speed_ms


_POSITIVE_FIELDS = (
    "bridge_length_m",
    "lanes",
    "lane_capacity_vph",
    "free_flow_speed_kmh",
    "jam_density_vpkm_lane",
    "ramp_max_flow_vph",
    "detour_travel_time_s",
    "time_step_s",
    "horizon_s",
)


def build_network(**overrides) -> CorridorNetwork:
    """Validate and return a corridor; raises ConfigurationError naming the bad field."""
    net = CorridorNetwork(**overrides)
    for name in _POSITIVE_FIELDS:
        value = getattr(net, name)
        if not value > 0:
            raise ConfigurationError(f"{name} must be strictly positive, got {value}")
    if net.num_cells < 3:
        raise ConfigurationError(f"num_cells must be at least 3, got {net.num_cells}")
    # CFL: vehicles may not traverse more than one cell per step.  The small
    # relative slack absorbs float noise when v * dt lands exactly on the
    # cell length (the default configuration does).
    travel = net.free_flow_speed_ms * net.time_step_s
    if travel > net.cell_length_m * (1.0 + 1e-9):
        raise ConfigurationError(
            "time_step_s violates the CFL condition: "
            f"free_flow_speed * time_step = {travel:.3f} m exceeds the "
            f"cell length {net.cell_length_m:.3f} m"
        )
    # Critical density must sit below jam density for the triangular diagram
    # to have a congested branch.
    crit = net.lane_capacity_vph / net.free_flow_speed_kmh
    if crit >= net.jam_density_vpkm_lane:
        raise ConfigurationError(
            "lane_capacity_vph / free_flow_speed_kmh must be below "
            f"jam_density_vpkm_lane ({crit:.1f} >= {net.jam_density_vpkm_lane:.1f})"
        )
    return net


def write_network(net: CorridorNetwork, path: str | Path) -> None:
    cp = configparser.ConfigParser()
    cp["network"] = {f.name: str(getattr(net, f.name)) for f in fields(net)}
    with open(path, "w") as fh:
        cp.write(fh)


def read_network(path: str | Path) -> CorridorNetwork:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    sec = cp["network"]
    kwargs = {}
    for f in fields(CorridorNetwork):
        raw = sec[f.name]
        kwargs[f.name] = int(raw) if f.type == "int" else float(raw)
    return build_network(**kwargs)
