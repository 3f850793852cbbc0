"""Cell-transmission simulation of the bridge corridor.

First-order CTM on a triangular fundamental diagram with an on-ramp merge,
ramp metering, rerouting to a fixed-cost detour, weather capacity/speed
multipliers, and a timed capacity-reducing incident.  Everything is
deterministic; scenario perturbations are fixed multipliers.

All runs go through one batched engine: a single simulate() is a batch of
one, best_action() a batch of twelve, dataset generation a batch of
thousands.  Per-row arithmetic is elementwise, so results are bit-identical
regardless of how rows are batched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import ScenarioFactors
from .network import CorridorNetwork
from .scenario import ACTIONS, ControlAction, Scenario, detector_cell, incident_cell


@dataclass(frozen=True)
class SimResult:
    mean_travel_time_s: float
    mean_delay_s: float
    throughput_veh: float
    objective_s: float
    detector_speed_kmh: float
    detector_occupancy: float
    vehicles_entered: float
    conservation_residual_veh: float

    def as_dict(self) -> dict:
        return {
            "meanTravelTime": self.mean_travel_time_s,
            "meanDelay": self.mean_delay_s,
            "throughput": self.throughput_veh,
            "objective": self.objective_s,
            "detectorSpeed": self.detector_speed_kmh,
            "detectorOccupancy": self.detector_occupancy,
        }


@dataclass(frozen=True)
class TrafficState:
    density_vpkm_lane: tuple[float, ...]
    ramp_queue_veh: float
    elapsed_s: float
    detector_speed_kmh: float
    detector_occupancy: float


class _BatchConsts:
    """Per-row constants for a batch of (scenario, action) pairs."""

    def __init__(
        self,
        net: CorridorNetwork,
        factors: ScenarioFactors,
        scenarios: list[Scenario],
        actions: list[ControlAction],
        incident_windowed: bool = True,
    ):
        b = len(scenarios)
        cells = net.num_cells
        self.net = net
        self.batch = b
        dt_h = net.time_step_s / 3600.0

        cap_factor = np.array([factors.capacity_factor(s.weather) for s in scenarios])
        spd_factor = np.array([factors.speed_factor(s.weather) for s in scenarios])
        mult = np.array(
            [
                factors.demand_multiplier(s.day_type, s.interval, s.season, s.demand_level)
                for s in scenarios
            ]
        )
        rho = np.array([a.rerouting_fraction for a in actions])
        meter = np.array(
            [
                min(a.metering_rate_vph, net.ramp_max_flow_vph)
                if a.metering_rate_vph is not None
                else net.ramp_max_flow_vph
                for a in actions
            ]
        )

        self.v_eff_kmh = net.free_flow_speed_kmh * spd_factor
        self.ff_time_s = net.bridge_length_m / (self.v_eff_kmh / 3.6)

        main_vph = factors.mainline_demand_vph * mult
        ramp_vph = factors.ramp_demand_vph * mult
        self.main_in = (1.0 - rho) * main_vph * dt_h
        self.reroute_in = rho * main_vph * dt_h
        self.ramp_in = ramp_vph * dt_h
        self.meter_cap = meter * dt_h

        profile = sorted(factors.demand_profile)
        if not profile or profile[0][0] > 0.0:
            raise ValueError("demand_profile must start at t=0")

        def profile_at(t_s: float) -> float:
            value = profile[0][1]
            for start, m in profile:
                if t_s >= start:
                    value = m
            return value

        self.profile_at = profile_at

        # Merge friction: sustained ramp inflow during the demand peak erodes
        # the merge cell's capacity, quadratically in the rate, so each
        # tighter metering rung buys back capacity.
        peak_mult = max(m for _, m in factors.demand_profile)
        sustained = np.minimum(meter, ramp_vph * peak_mult) / net.ramp_max_flow_vph
        friction = 1.0 - factors.merge_friction * np.minimum(sustained, 1.0) ** 2

        cap = np.repeat(
            (net.cell_capacity_vph * cap_factor)[:, None], cells, axis=1
        )
        cap[:, net.ramp_cell] *= friction
        inc_cells = np.array(
            [incident_cell(s.incident_location, cells) for s in scenarios]
        )
        reduction = np.array(
            [factors.incident_reductions[s.incident_severity] for s in scenarios]
        )
        cap_inc = cap.copy()
        cap_inc[np.arange(b), inc_cells] *= 1.0 - reduction

        def per_step(cap_vph: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            q_lane = cap_vph / net.lanes
            crit = q_lane / self.v_eff_kmh[:, None]
            wave_kmh = q_lane / (net.jam_density_vpkm_lane - crit)
            w_frac = wave_kmh / 3.6 * net.time_step_s / net.cell_length_m
            return cap_vph * dt_h, w_frac

        self.cap_step, self.w_frac = per_step(cap)
        self.cap_step_inc, self.w_frac_inc = per_step(cap_inc)

        self.r_free = (self.v_eff_kmh / 3.6 * net.time_step_s / net.cell_length_m)[:, None]
        self.jam_cell = net.jam_vehicles_per_cell
        self.det_cell = np.array(
            [detector_cell(s.incident_location, cells) for s in scenarios]
        )
        self.p_ramp = net.ramp_max_flow_vph / (net.ramp_max_flow_vph + net.cell_capacity_vph)
        if incident_windowed:
            self.inc_window = (factors.incident_start_s, factors.incident_end_s)
            self.det_window = factors.detector_window
        else:
            self.inc_window = (0.0, float("inf"))
            self.det_window = (0.0, float("inf"))


class _BatchState:
    def __init__(self, consts: _BatchConsts):
        b, cells = consts.batch, consts.net.num_cells
        self.n = np.zeros((b, cells))
        self.src_q = np.zeros(b)
        self.ramp_q = np.zeros(b)
        self.elapsed_s = 0.0
        self.ttt = np.zeros(b)  # vehicle-seconds inside corridor + queues
        self.entered = np.zeros(b)
        self.exited = np.zeros(b)
        self.rerouted = np.zeros(b)
        self.det_spd_sum = np.zeros(b)
        self.det_occ_sum = np.zeros(b)
        self.det_steps = 0


def _step(state: _BatchState, c: _BatchConsts) -> None:
    net = c.net
    dt = net.time_step_s
    rows = np.arange(c.batch)

    start, end = c.inc_window
    if start <= state.elapsed_s < end:
        cap_step, w_frac = c.cap_step_inc, c.w_frac_inc
    else:
        cap_step, w_frac = c.cap_step, c.w_frac

    sending = np.minimum(state.n * c.r_free, cap_step)
    receiving = np.minimum(cap_step, w_frac * (c.jam_cell - state.n))

    # queues receive this step's arrivals before discharging
    p = c.profile_at(state.elapsed_s)
    state.src_q += c.main_in * p
    state.ramp_q += c.ramp_in * p
    state.entered += (c.main_in + c.ramp_in + c.reroute_in) * p
    state.rerouted += c.reroute_in * p

    m = net.ramp_cell
    flows = np.empty((c.batch, net.num_cells + 1))
    flows[:, 0] = np.minimum(state.src_q, receiving[:, 0])
    flows[:, 1:-1] = np.minimum(sending[:, :-1], receiving[:, 1:])
    flows[:, -1] = sending[:, -1]

    # Daganzo merge at the ramp cell: mainline and metered ramp share supply.
    ramp_ready = np.minimum(state.ramp_q, c.meter_cap)
    d_up = sending[:, m - 1]
    s_m = receiving[:, m]
    free = d_up + ramp_ready <= s_m
    f_ramp = np.where(
        free,
        ramp_ready,
        np.minimum(ramp_ready, np.maximum(s_m - d_up, c.p_ramp * s_m)),
    )
    flows[:, m] = np.where(free, d_up, np.minimum(d_up, s_m - f_ramp))

    state.n += flows[:, :-1] - flows[:, 1:]
    state.n[:, m] += f_ramp
    state.src_q -= flows[:, 0]
    state.ramp_q -= f_ramp
    state.exited += flows[:, -1]

    state.ttt += (state.n.sum(axis=1) + state.src_q + state.ramp_q) * dt

    det_lo, det_hi = c.det_window
    if det_lo <= state.elapsed_s < det_hi:
        n_det = state.n[rows, c.det_cell]
        f_det = flows[rows, c.det_cell + 1]
        dt_h = dt / 3600.0
        cell_km = net.cell_length_m / 1000.0
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(n_det > 1e-12, f_det * cell_km / (dt_h * n_det), c.v_eff_kmh)
        state.det_spd_sum += v
        state.det_occ_sum += n_det / c.jam_cell
        state.det_steps += 1
    state.elapsed_s += dt


def _finish(state: _BatchState, c: _BatchConsts) -> list[SimResult]:
    net = c.net
    total_time = state.ttt + state.rerouted * net.detour_travel_time_s
    entered = state.entered
    mean_tt = np.where(entered > 0, total_time / np.maximum(entered, 1e-300), c.ff_time_s)
    mean_delay = np.maximum(0.0, mean_tt - c.ff_time_s)
    throughput = state.exited + state.rerouted
    remaining = state.n.sum(axis=1) + state.src_q + state.ramp_q
    residual = entered - (state.exited + state.rerouted) - remaining
    det_spd = state.det_spd_sum / state.det_steps
    det_occ = state.det_occ_sum / state.det_steps
    return [
        SimResult(
            mean_travel_time_s=float(mean_tt[i]),
            mean_delay_s=float(mean_delay[i]),
            throughput_veh=float(throughput[i]),
            objective_s=float(mean_tt[i] + mean_delay[i]),
            detector_speed_kmh=float(det_spd[i]),
            detector_occupancy=float(det_occ[i]),
            vehicles_entered=float(entered[i]),
            conservation_residual_veh=float(residual[i]),
        )
        for i in range(c.batch)
    ]


def simulate_batch(
    net: CorridorNetwork,
    scenarios: list[Scenario],
    actions: list[ControlAction],
    factors: ScenarioFactors | None = None,
) -> list[SimResult]:
    if len(scenarios) != len(actions):
        raise ValueError("scenarios and actions must have equal length")
    if not scenarios:
        return []
    factors = factors or ScenarioFactors()
    consts = _BatchConsts(net, factors, scenarios, actions)
    state = _BatchState(consts)
    for _ in range(net.num_steps):
        _step(state, consts)
    return _finish(state, consts)


def simulate(
    net: CorridorNetwork,
    scenario: Scenario,
    action: ControlAction,
    factors: ScenarioFactors | None = None,
) -> SimResult:
    return simulate_batch(net, [scenario], [action], factors)[0]


def best_action(
    net: CorridorNetwork,
    scenario: Scenario,
    factors: ScenarioFactors | None = None,
) -> tuple[ControlAction, SimResult]:
    """Argmin of the objective over the 12 actions; exact ties go to the
    least restrictive action (ACTIONS is enumerated in that order)."""
    results = simulate_batch(net, [scenario] * len(ACTIONS), list(ACTIONS), factors)
    objectives = np.array([r.objective_s for r in results])
    idx = int(np.argmin(objectives))
    return ACTIONS[idx], results[idx]


def baseline_features(
    net: CorridorNetwork,
    scenario: Scenario,
    factors: ScenarioFactors | None = None,
) -> tuple[float, float]:
    """Detector readings under the do-nothing action (unrestricted, 0.0)."""
    res = simulate(net, scenario, ACTIONS[0], factors)
    return res.detector_speed_kmh, res.detector_occupancy


class LiveCorridor:
    """Mutable single-corridor simulation for live operator sessions.

    Unlike grid runs, injected incidents have no fixed time window: they stay
    active until the scenario is mutated again.
    """

    def __init__(
        self,
        net: CorridorNetwork,
        scenario: Scenario,
        action: ControlAction,
        factors: ScenarioFactors | None = None,
    ):
        self.net = net
        self.factors = factors or ScenarioFactors()
        self.scenario = scenario
        self.action = action
        self._consts = _BatchConsts(
            net, self.factors, [scenario], [action], incident_windowed=False
        )
        self._state = _BatchState(self._consts)
        self._last_speed = float(self._consts.v_eff_kmh[0])
        self._last_occ = 0.0

    def _rebuild(self) -> None:
        elapsed = self._state.elapsed_s
        self._consts = _BatchConsts(
            self.net, self.factors, [self.scenario], [self.action], incident_windowed=False
        )
        self._state.elapsed_s = elapsed

    def set_action(self, action: ControlAction) -> None:
        self.action = action
        self._rebuild()

    def set_scenario(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self._rebuild()

    def advance(self, sim_seconds: float) -> TrafficState:
        steps = max(1, int(round(sim_seconds / self.net.time_step_s)))
        st = self._state
        spd0, occ0, cnt0 = st.det_spd_sum.copy(), st.det_occ_sum.copy(), st.det_steps
        for _ in range(steps):
            _step(st, self._consts)
        window = st.det_steps - cnt0
        self._last_speed = float((st.det_spd_sum - spd0)[0] / window)
        self._last_occ = float((st.det_occ_sum - occ0)[0] / window)
        return self.state()

    def state(self) -> TrafficState:
        st = self._state
        veh_to_density = 1.0 / (self.net.lanes * self.net.cell_length_m / 1000.0)
        return TrafficState(
            density_vpkm_lane=tuple(float(x) for x in st.n[0] * veh_to_density),
            ramp_queue_veh=float(st.ramp_q[0]),
            elapsed_s=float(st.elapsed_s),
            detector_speed_kmh=self._last_speed,
            detector_occupancy=self._last_occ,
        )
