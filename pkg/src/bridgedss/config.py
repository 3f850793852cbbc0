"""Scenario factor tables and the sectioned text config file.

Every number that shapes the scenario grid lives here: weather capacity and
speed multipliers, the day-type/interval/season base-demand lookup, demand
level multipliers, incident severity reductions and timing, and the merge
model constants.  All values are declared configuration: they can be edited
in one INI file and versioned alongside generated datasets.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

FACTORS_VERSION = 1

WEATHERS = ("snowing", "raining", "foggy", "wet")
DAY_TYPES = ("weekday", "holiday")
INTERVALS = ("morning", "noon", "night")
SEASONS = ("spring", "summer", "autumn", "winter")
SEVERITIES = ("none", "minor", "moderate", "severe")

# (capacity multiplier, free-flow speed multiplier).  Capacity multipliers
# are strictly ordered but deliberately close together: weather then shifts
# control thresholds by less than one demand level, which keeps the class
# regions close to axis-aligned boxes in the feature space.
DEFAULT_WEATHER_FACTORS: dict[str, tuple[float, float]] = {
    "wet": (0.905, 0.95),
    "raining": (0.90, 0.90),
    "foggy": (0.895, 0.80),
    "snowing": (0.8875, 0.70),
}

# Base demand factor per (day type, interval, season).  Flat by default: the
# demand signal lives entirely in the demand-level factors, so calendar
# context adds grid coverage without fragmenting the decision boundaries.
DEFAULT_BASE_DEMAND: dict[tuple[str, str, str], float] = {
    (d, i, s): 1.0
    for d in ("weekday", "holiday")
    for i in ("morning", "noon", "night")
    for s in ("spring", "summer", "autumn", "winter")
}

DEFAULT_DEMAND_LEVELS = (0.85, 0.94, 1.00, 1.06, 1.12, 1.20)

# Capacity reduction at the incident cell per severity.
DEFAULT_INCIDENT_REDUCTIONS: dict[str, float] = {
    "none": 0.0,
    "minor": 0.25,
    "moderate": 0.50,
    "severe": 0.90,
}


@dataclass(frozen=True)
class ScenarioFactors:
    """All scenario-grid multipliers and control constants."""

    weather: dict[str, tuple[float, float]] = field(
        default_factory=lambda: dict(DEFAULT_WEATHER_FACTORS)
    )
    base_demand: dict[tuple[str, str, str], float] = field(
        default_factory=lambda: dict(DEFAULT_BASE_DEMAND)
    )
    demand_levels: tuple[float, ...] = DEFAULT_DEMAND_LEVELS
    incident_reductions: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_INCIDENT_REDUCTIONS)
    )
    incident_start_s: float = 600.0
    incident_end_s: float = 1800.0
    mainline_demand_vph: float = 2900.0
    ramp_demand_vph: float = 850.0
    merge_friction: float = 0.50
    # Stepwise within-horizon demand shape: (start_s, multiplier) pairs.
    # A peak that tapers lets metered ramp queues drain before the horizon.
    demand_profile: tuple[tuple[float, float], ...] = ((0.0, 1.25), (2400.0, 0.5))
    # Detector readings are averaged over this assessment window, covering
    # the demand peak and the incident, where congestion actually shows.
    detector_window: tuple[float, float] = (600.0, 2400.0)
    metering_rates: tuple[float, ...] = (900.0, 600.0, 300.0)  # besides unrestricted
    rerouting_fractions: tuple[float, ...] = (0.0, 0.2, 0.4)
    version: int = FACTORS_VERSION

    def demand_multiplier(self, day_type: str, interval: str, season: str, level: int) -> float:
        return self.base_demand[(day_type, interval, season)] * self.demand_levels[level]

    def capacity_factor(self, weather: str) -> float:
        return self.weather[weather][0]

    def speed_factor(self, weather: str) -> float:
        return self.weather[weather][1]


def write_factors(factors: ScenarioFactors, path: str | Path) -> None:
    """Persist factor tables as a sectioned key/value file."""
    cp = configparser.ConfigParser()
    cp["meta"] = {"version": str(factors.version)}
    cp["weather"] = {
        w: f"{c} {s}" for w, (c, s) in sorted(factors.weather.items())
    }
    cp["base_demand"] = {
        f"{d}.{i}.{s}": str(v) for (d, i, s), v in sorted(factors.base_demand.items())
    }
    cp["demand_levels"] = {
        str(i): str(v) for i, v in enumerate(factors.demand_levels)
    }
    cp["incident"] = {
        **{f"reduction_{k}": str(v) for k, v in sorted(factors.incident_reductions.items())},
        "start_s": str(factors.incident_start_s),
        "end_s": str(factors.incident_end_s),
    }
    cp["demand"] = {
        "mainline_vph": str(factors.mainline_demand_vph),
        "ramp_vph": str(factors.ramp_demand_vph),
        "profile": " ".join(f"{t}:{m}" for t, m in factors.demand_profile),
    }
    cp["control"] = {
        "merge_friction": str(factors.merge_friction),
        "metering_rates": " ".join(str(r) for r in factors.metering_rates),
        "rerouting_fractions": " ".join(str(f) for f in factors.rerouting_fractions),
    }
    with open(path, "w") as fh:
        cp.write(fh)


def read_factors(path: str | Path) -> ScenarioFactors:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    weather = {}
    for w, pair in cp["weather"].items():
        cap, spd = pair.split()
        weather[w] = (float(cap), float(spd))
    base = {}
    for key, v in cp["base_demand"].items():
        d, i, s = key.split(".")
        base[(d, i, s)] = float(v)
    levels = tuple(
        float(cp["demand_levels"][str(i)]) for i in range(len(cp["demand_levels"]))
    )
    reductions = {
        k.removeprefix("reduction_"): float(v)
        for k, v in cp["incident"].items()
        if k.startswith("reduction_")
    }
    return ScenarioFactors(
        weather=weather,
        base_demand=base,
        demand_levels=levels,
        incident_reductions=reductions,
        incident_start_s=float(cp["incident"]["start_s"]),
        incident_end_s=float(cp["incident"]["end_s"]),
        mainline_demand_vph=float(cp["demand"]["mainline_vph"]),
        ramp_demand_vph=float(cp["demand"]["ramp_vph"]),
        demand_profile=tuple(
            (float(p.split(":")[0]), float(p.split(":")[1]))
            for p in cp["demand"]["profile"].split()
        ),
        merge_friction=float(cp["control"]["merge_friction"]),
        metering_rates=tuple(
            float(r) for r in cp["control"]["metering_rates"].split()
        ),
        rerouting_fractions=tuple(
            float(f) for f in cp["control"]["rerouting_fractions"].split()
        ),
        version=int(cp["meta"]["version"]),
    )
