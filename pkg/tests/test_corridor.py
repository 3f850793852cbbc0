import math
import random

import numpy as np
import pytest

from bridgedss.config import ScenarioFactors
from bridgedss.corridor import (
    ACTIONS,
    ConfigurationError,
    Scenario,
    action_id,
    baseline_features,
    best_action,
    build_network,
    enumerate_grid,
    incident_cell,
    simulate,
    simulate_batch,
)
from bridgedss.corridor.network import read_network, write_network
from bridgedss.corridor.scenario import action_from_id


def zero_demand_factors():
    return ScenarioFactors(mainline_demand_vph=0.0, ramp_demand_vph=0.0)


def neutral_zero_demand_factors():
    """Zero demand with a unit speed factor so free-flow identities are
    exactly the nominal network values."""
    weather = {w: (c, 1.0) for w, (c, _) in ScenarioFactors().weather.items()}
    return ScenarioFactors(weather=weather, mainline_demand_vph=0.0, ramp_demand_vph=0.0)


SCEN = Scenario("wet", "weekday", "morning", "spring", "none", 3, 2)


class TestBuildNetwork:
    def test_default_is_valid(self):
        net = build_network(
            bridge_length_m=1000.0,
            num_cells=10,
            lanes=3,
            lane_capacity_vph=2000.0,
            free_flow_speed_kmh=80.0,
        )
        assert net.num_cells == 10
        assert net.cell_length_m == 100.0

    def test_cfl_violation_rejected(self):
        with pytest.raises(ConfigurationError, match="CFL"):
            build_network(time_step_s=10.0)

    def test_too_few_cells_rejected(self):
        with pytest.raises(ConfigurationError, match="num_cells"):
            build_network(num_cells=2)

    def test_nonpositive_quantity_names_field(self):
        with pytest.raises(ConfigurationError, match="lane_capacity_vph"):
            build_network(lane_capacity_vph=0.0)

    def test_config_roundtrip(self, tmp_path):
        net = build_network(lanes=2, horizon_s=1800.0)
        path = tmp_path / "network.ini"
        write_network(net, path)
        assert read_network(path) == net


class TestSimulate:
    def test_zero_demand_free_flow_identity(self, network):
        res = simulate(network, SCEN, ACTIONS[0], neutral_zero_demand_factors())
        assert res.mean_delay_s == 0.0
        assert res.mean_travel_time_s == pytest.approx(
            network.free_flow_time_s, abs=1e-12
        )

    def test_zero_demand_effective_speed_identity(self, network, factors):
        """With weather speed factors active the identity holds against the
        scenario-effective free-flow speed, for every weather."""
        zf = zero_demand_factors()
        for weather in ("snowing", "raining", "foggy", "wet"):
            scen = SCEN.with_weather(weather)
            res = simulate(network, scen, ACTIONS[0], zf)
            v_eff = network.free_flow_speed_kmh * zf.speed_factor(weather) / 3.6
            assert res.mean_delay_s == 0.0
            assert res.mean_travel_time_s == pytest.approx(
                network.bridge_length_m / v_eff, abs=1e-12
            )

    def test_snowing_objective_at_least_wet(self, network, factors):
        for level in (0, 3, 5):
            for sev in ("none", "severe"):
                base = Scenario("wet", "weekday", "noon", "summer", sev, 2, level)
                snow = base.with_weather("snowing")
                r_wet = simulate(network, base, ACTIONS[0], factors)
                r_snow = simulate(network, snow, ACTIONS[0], factors)
                assert r_snow.objective_s >= r_wet.objective_s - 1e-9

    def test_conservation_residual(self, network, factors):
        random.seed(7)
        sample = random.sample(list(enumerate_grid()), 50)
        for scen in sample:
            res = simulate(network, scen, ACTIONS[4], factors)
            assert abs(res.conservation_residual_veh) <= 1e-9

    def test_objective_is_tt_plus_delay(self, network, factors):
        res = simulate(network, SCEN, ACTIONS[2], factors)
        assert res.objective_s == pytest.approx(
            res.mean_travel_time_s + res.mean_delay_s
        )
        assert res.mean_delay_s >= 0.0

    def test_throughput_bounded_by_demand(self, network, factors):
        res = simulate(network, SCEN, ACTIONS[0], factors)
        assert res.throughput_veh <= res.vehicles_entered + 1e-9

    def test_purity_batch_independence(self, network, factors):
        """A row's result is bit-identical whether simulated alone or batched."""
        single = simulate(network, SCEN, ACTIONS[7], factors)
        batch = simulate_batch(
            network,
            [Scenario("snowing", "holiday", "night", "winter", "severe", 5, 5), SCEN],
            [ACTIONS[0], ACTIONS[7]],
            factors,
        )
        assert batch[1] == single

    def test_density_bounds(self, network, factors):
        from bridgedss.corridor.engine import _BatchConsts, _BatchState, _step

        scen = Scenario("snowing", "weekday", "morning", "winter", "severe", 3, 5)
        consts = _BatchConsts(network, factors, [scen], [ACTIONS[0]])
        state = _BatchState(consts)
        for _ in range(network.num_steps):
            _step(state, consts)
            assert (state.n >= -1e-12).all()
            assert (state.n <= consts.jam_cell + 1e-9).all()


class TestBestAction:
    def test_zero_demand_ties_break_least_restrictive(self, network):
        action, res = best_action(network, SCEN, zero_demand_factors())
        assert action == ACTIONS[0]
        assert action.metering_rate_vph is None
        assert action.rerouting_fraction == 0.0

    def test_severe_incident_peak_demand_reroutes(self, network, factors):
        scen = Scenario("wet", "weekday", "morning", "spring", "severe", 3, 5)
        action, _ = best_action(network, scen, factors)
        assert action.rerouting_fraction > 0.0

    def test_best_action_is_brute_force_argmin(self, network, factors):
        scen = Scenario("foggy", "weekday", "noon", "autumn", "moderate", 2, 4)
        action, res = best_action(network, scen, factors)
        objectives = [
            simulate(network, scen, a, factors).objective_s for a in ACTIONS
        ]
        assert res.objective_s == min(objectives)
        assert action_id(action) == int(np.argmin(objectives))

    def test_deterministic(self, network, factors):
        a1, r1 = best_action(network, SCEN, factors)
        a2, r2 = best_action(network, SCEN, factors)
        assert a1 == a2 and r1 == r2


class TestBaselineFeatures:
    def test_zero_demand_detector(self, network):
        speed, occ = baseline_features(network, SCEN, neutral_zero_demand_factors())
        assert speed == pytest.approx(network.free_flow_speed_kmh, abs=1e-12)
        assert occ == 0.0

    def test_severe_occupancy_dominates_none(self, network, factors):
        for loc in (1, 3, 5):
            base = Scenario("raining", "weekday", "morning", "spring", "none", loc, 4)
            severe = base.with_incident("severe", loc)
            _, occ_none = baseline_features(network, base, factors)
            _, occ_severe = baseline_features(network, severe, factors)
            assert occ_severe >= occ_none

    def test_occupancy_in_unit_interval(self, network, factors):
        random.seed(3)
        for scen in random.sample(list(enumerate_grid()), 25):
            _, occ = baseline_features(network, scen, factors)
            assert 0.0 <= occ <= 1.0


class TestScenarioGrid:
    def test_grid_cardinality(self):
        grid = list(enumerate_grid())
        assert len(grid) == 11520
        assert len(set(grid)) == 11520

    def test_twelve_distinct_actions(self):
        assert len(ACTIONS) == 12
        assert len(set(ACTIONS)) == 12
        assert [action_id(a) for a in ACTIONS] == list(range(12))
        for aid in range(12):
            assert action_id(action_from_id(aid)) == aid

    def test_action_total_order(self):
        labels = [a.label() for a in sorted(ACTIONS)]
        assert labels[0] == "unrestricted/0.0"
        assert labels[-1] == "300/0.4"

    def test_invalid_scenario_rejected(self):
        with pytest.raises(ValueError):
            Scenario("sunny", "weekday", "morning", "spring", "none", 3, 2)
        with pytest.raises(ValueError):
            Scenario("wet", "weekday", "morning", "spring", "none", 9, 2)

    def test_incident_cells_interior_and_downstream_of_merge(self, network):
        cells = [incident_cell(loc, network.num_cells) for loc in (1, 2, 3, 4, 5)]
        assert len(set(cells)) == 5
        assert all(network.ramp_cell < c <= network.num_cells - 2 for c in cells)
