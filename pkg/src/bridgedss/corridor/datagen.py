"""Scenario-grid dataset generation and record I/O."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from ..config import ScenarioFactors
from .engine import simulate_batch
from .network import CorridorNetwork
from .scenario import ACTIONS, Scenario, enumerate_grid

CSV_COLUMNS = (
    "weather",
    "dayType",
    "interval",
    "season",
    "severity",
    "location",
    "demandLevel",
    "detectorSpeed",
    "detectorOccupancy",
    "class",
)


@dataclass(frozen=True)
class ScenarioRecord:
    scenario: Scenario
    detector_speed_kmh: float
    detector_occupancy: float
    action_id: int

    def row(self) -> list:
        s = self.scenario
        return [
            s.weather,
            s.day_type,
            s.interval,
            s.season,
            s.incident_severity,
            s.incident_location,
            s.demand_level,
            repr(self.detector_speed_kmh),
            repr(self.detector_occupancy),
            self.action_id,
        ]


def label_scenarios(
    net: CorridorNetwork,
    scenarios: list[Scenario],
    factors: ScenarioFactors | None = None,
    chunk: int = 1024,
    progress: Callable[[int, int], None] | None = None,
) -> list[ScenarioRecord]:
    """Simulate all 12 actions per scenario and label with the objective argmin.

    Detector features come from the do-nothing run, which is action 0 of the
    same batch, so each scenario costs exactly 12 simulations.
    """
    factors = factors or ScenarioFactors()
    n_actions = len(ACTIONS)
    records: list[ScenarioRecord] = []
    for lo in range(0, len(scenarios), chunk):
        block = scenarios[lo : lo + chunk]
        expanded = [s for s in block for _ in range(n_actions)]
        actions = list(ACTIONS) * len(block)
        results = simulate_batch(net, expanded, actions, factors)
        objectives = np.array([r.objective_s for r in results]).reshape(
            len(block), n_actions
        )
        best = objectives.argmin(axis=1)
        for i, scen in enumerate(block):
            baseline = results[i * n_actions]  # ACTIONS[0] = (unrestricted, 0.0)
            records.append(
                ScenarioRecord(
                    scenario=scen,
                    detector_speed_kmh=baseline.detector_speed_kmh,
                    detector_occupancy=baseline.detector_occupancy,
                    action_id=int(best[i]),
                )
            )
        if progress is not None:
            progress(min(lo + chunk, len(scenarios)), len(scenarios))
    return records


def generate_dataset(
    net: CorridorNetwork,
    factors: ScenarioFactors | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> list[ScenarioRecord]:
    return label_scenarios(net, list(enumerate_grid()), factors, progress=progress)


def write_csv(records: Iterable[ScenarioRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.row())


def write_jsonl(records: Iterable[ScenarioRecord], path: str | Path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(dict(zip(CSV_COLUMNS, rec.row()))) + "\n")


def read_records(path: str | Path) -> list[ScenarioRecord]:
    """Read records back from CSV or JSONL (by extension)."""
    path = Path(path)
    rows: list[dict] = []
    if path.suffix == ".jsonl":
        with open(path) as fh:
            rows = [json.loads(line) for line in fh if line.strip()]
    else:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    records = []
    for row in rows:
        scen = Scenario(
            weather=row["weather"],
            day_type=row["dayType"],
            interval=row["interval"],
            season=row["season"],
            incident_severity=row["severity"],
            incident_location=int(row["location"]),
            demand_level=int(row["demandLevel"]),
        )
        records.append(
            ScenarioRecord(
                scenario=scen,
                detector_speed_kmh=float(row["detectorSpeed"]),
                detector_occupancy=float(row["detectorOccupancy"]),
                action_id=int(row["class"]),
            )
        )
    return records
