"""Scenario grid and the control action space."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

from ..config import DAY_TYPES, INTERVALS, SEASONS, SEVERITIES, WEATHERS

INCIDENT_LOCATIONS = (1, 2, 3, 4, 5)
DEMAND_LEVELS = (0, 1, 2, 3, 4, 5)
GRID_SIZE = (
    len(WEATHERS)
    * len(DAY_TYPES)
    * len(INTERVALS)
    * len(SEASONS)
    * len(SEVERITIES)
    * len(INCIDENT_LOCATIONS)
    * len(DEMAND_LEVELS)
)


@dataclass(frozen=True)
class Scenario:
    weather: str
    day_type: str
    interval: str
    season: str
    incident_severity: str
    incident_location: int  # 1..5, mapped onto interior cells
    demand_level: int  # 0..5

    def __post_init__(self) -> None:
        if self.weather not in WEATHERS:
            raise ValueError(f"unknown weather {self.weather!r}")
        if self.day_type not in DAY_TYPES:
            raise ValueError(f"unknown day_type {self.day_type!r}")
        if self.interval not in INTERVALS:
            raise ValueError(f"unknown interval {self.interval!r}")
        if self.season not in SEASONS:
            raise ValueError(f"unknown season {self.season!r}")
        if self.incident_severity not in SEVERITIES:
            raise ValueError(f"unknown severity {self.incident_severity!r}")
        if self.incident_location not in INCIDENT_LOCATIONS:
            raise ValueError(f"incident_location must be in 1..5, got {self.incident_location}")
        if self.demand_level not in DEMAND_LEVELS:
            raise ValueError(f"demand_level must be in 0..5, got {self.demand_level}")

    def with_weather(self, weather: str) -> "Scenario":
        return replace(self, weather=weather)

    def with_incident(self, severity: str, location: int) -> "Scenario":
        return replace(self, incident_severity=severity, incident_location=location)


@dataclass(frozen=True, order=True)
class ControlAction:
    """A (ramp metering, rerouting) pair.

    metering_index orders unrestricted < 900 < 600 < 300, so dataclass
    ordering is exactly the least-restrictive-first tie-break order.
    """

    metering_index: int  # 0 = unrestricted, then 900/600/300 veh/h
    rerouting_index: int  # 0 -> 0.0, 1 -> 0.2, 2 -> 0.4

    METERING_RATES = (None, 900.0, 600.0, 300.0)
    REROUTING_FRACTIONS = (0.0, 0.2, 0.4)

    @property
    def metering_rate_vph(self) -> float | None:
        return self.METERING_RATES[self.metering_index]

    @property
    def rerouting_fraction(self) -> float:
        return self.REROUTING_FRACTIONS[self.rerouting_index]

    @property
    def metering_label(self) -> str:
        rate = self.metering_rate_vph
        return "unrestricted" if rate is None else str(int(rate))

    def label(self) -> str:
        return f"{self.metering_label}/{self.rerouting_fraction:.1f}"


ACTIONS: tuple[ControlAction, ...] = tuple(
    ControlAction(m, r) for m in range(4) for r in range(3)
)


def action_id(action: ControlAction) -> int:
    return action.metering_index * 3 + action.rerouting_index


def action_from_id(class_id: int) -> ControlAction:
    if not 0 <= class_id < len(ACTIONS):
        raise ValueError(f"action id out of range: {class_id}")
    return ACTIONS[class_id]


def enumerate_grid() -> Iterator[Scenario]:
    """Canonical enumeration of all 11,520 scenarios.

    Order matches the dataset column order: weather, day type, interval,
    season, severity, location, demand level.
    """
    for weather in WEATHERS:
        for day_type in DAY_TYPES:
            for interval in INTERVALS:
                for season in SEASONS:
                    for severity in SEVERITIES:
                        for location in INCIDENT_LOCATIONS:
                            for level in DEMAND_LEVELS:
                                yield Scenario(
                                    weather,
                                    day_type,
                                    interval,
                                    season,
                                    severity,
                                    location,
                                    level,
                                )


def incident_cell(location: int, num_cells: int) -> int:
    """Map a location index 1..5 onto interior cells downstream of the merge.

    Keeping incidents downstream of the ramp means the merge model and the
    incident bottleneck never coincide, and every incident queue spills back
    toward the detector.
    """
    first = max(1, num_cells // 5) + 1  # cell after the merge
    last = num_cells - 2
    if last < first:
        raise ValueError("network too short for an interior incident cell")
    return first + round((location - 1) * (last - first) / 4)


def detector_cell(location: int, num_cells: int) -> int:
    """Detector sits immediately upstream of the incident cell, where any
    incident queue forms first."""
    return max(0, incident_cell(location, num_cells) - 1)
