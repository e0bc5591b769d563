"""Tests for agents, observers and the closed-loop simulation."""

from dataclasses import replace

import numpy as np
import pytest

from conftest import A_ROBOT, B_ROBOT, K_ROBOT
from quantrack.config import ScenarioConfig
from quantrack.errors import ConfigError
from quantrack.lin_core import spectral_radius
from quantrack.sim import (
    AgentModel, build_scenario, case_dynamics_check, control_input, observer_step, settling_time, simulate,
)
from quantrack.types import StepCase, Verdict


def test_observer_jammed_step_propagates():
    s_bar = np.array([[1.1, 1.0], [0.0, 1.1]])
    z = np.array([1.0, 2.0])
    out = observer_step(z, np.array([5.0, 5.0]), np.array([[9.0, 9.0]]), np.array([1.0]),
                        np.array([7.0, 7.0]), 1.0, s_bar, 0.5 * np.eye(2), jammed=True)
    np.testing.assert_allclose(out, s_bar @ z)


def test_observer_consensus_fixed_point():
    s_bar = np.array([[1.1]])
    z = np.array([3.0])
    out = observer_step(z, z, np.array([z, z]), np.array([1.0, 0.5]), np.array([0.0]), 0.0,
                        s_bar, np.array([[0.4]]), jammed=False)
    np.testing.assert_allclose(out, [3.3])


def test_observer_pinned_follower():
    out = observer_step(np.array([2.0]), np.array([0.0]), np.zeros((0, 1)), np.zeros(0), np.array([1.0]), 1.0,
                        np.array([[1.0]]), np.array([[0.5]]), jammed=False)
    np.testing.assert_allclose(out, [2.5])


def test_control_input_cases():
    agent = AgentModel.build([[0.5]], [[1.0]], [[1.0]], [[-0.2]], [4.0], [[1.05]])
    np.testing.assert_allclose(agent.F, [[1.0]])
    np.testing.assert_allclose(agent.V, [[0.55]])
    np.testing.assert_allclose(control_input(agent, np.zeros(1)), [-0.8])
    z = np.array([3.0])
    agent.x = agent.F @ z
    np.testing.assert_allclose(control_input(agent, z), agent.V @ z, atol=1e-10)


def test_robot_gain_stabilizes_plant():
    assert spectral_radius(A_ROBOT + B_ROBOT @ K_ROBOT) < 1


def test_scenario_defaults(load_scenario):
    scenario = load_scenario("ring_certified")
    codec = scenario.config.codec
    v_bar0 = scenario.dec.to_bar(scenario.v0, 0)
    assert scenario.c_x0 == pytest.approx(max(8.0, float(np.max(np.abs(v_bar0)))))
    assert scenario.theta0 == pytest.approx(scenario.c_x0 * codec.gamma1 / codec.sigma)
    floor = 1e-3 * max(1.0, float(np.max(np.abs(v_bar0))))
    np.testing.assert_allclose(scenario.omega0, np.maximum(1.1 * np.abs(v_bar0), floor))
    assert np.all(scenario.omega0 > np.abs(v_bar0))
    assert scenario.gains.rho_g == pytest.approx(0.9161, abs=1e-3)
    assert scenario.dec.rho == pytest.approx(1.1052)
    assert scenario.dos.count_transitions(0.0, 20.0) == 42
    assert scenario.warnings == []


def test_scenario_rejects_small_omega(scenario_path):
    config = ScenarioConfig.load(scenario_path("ring_certified"))
    bad = replace(config, codec=replace(config.codec, omega0=(1e-6, 1e-6)))
    with pytest.raises(ConfigError) as excinfo:
        build_scenario(bad)
    assert excinfo.value.path == "codec.omega0"


def test_scenario_rejects_unstable_follower(small_config_dict):
    small_config_dict["followers"][1]["K"] = [[0.5]]
    config = ScenarioConfig.from_dict(small_config_dict)
    with pytest.raises(ConfigError) as excinfo:
        build_scenario(config)
    assert excinfo.value.path == "followers[1].K"


def test_step_cases():
    assert StepCase.of(False, False) == StepCase.I
    assert StepCase.of(True, False) == StepCase.II
    assert StepCase.of(False, True) == StepCase.III
    assert StepCase.of(True, True) == StepCase.IV


def test_baseline_converges_geometrically(load_scenario):
    trace = simulate(load_scenario("baseline"))
    assert trace.verdict == Verdict.CONVERGED
    assert not trace.jam.any()
    assert trace.final_error <= 1e-4 * trace.initial_error
    assert trace.saturation_count == 0


def test_certified_run_tracks_leader(load_scenario):
    scenario = load_scenario("ring_certified")
    trace = simulate(scenario)
    assert trace.verdict == Verdict.CONVERGED
    assert trace.steps == 200
    assert trace.final_error <= 1e-2 * trace.initial_error
    assert trace.saturation_count == 0
    assert trace.max_q_arg <= 100

    report = case_dynamics_check(trace)
    assert report.ok, report.details
    assert report.counts[StepCase.IV] > 0
    assert report.counts[StepCase.II] > 0
    assert sum(report.counts.values()) == trace.steps


def test_runs_are_deterministic(load_scenario):
    scenario = load_scenario("ceiling_ok")
    first, second = simulate(scenario), simulate(scenario)
    np.testing.assert_array_equal(first.errors, second.errors)
    np.testing.assert_array_equal(first.follower_codewords, second.follower_codewords)


def test_bottleneck_run_diverges(load_scenario):
    trace = simulate(load_scenario("ring_bottleneck"))
    assert trace.verdict == Verdict.DIVERGED


def test_rate_ceiling(load_scenario):
    ok = simulate(load_scenario("ceiling_ok"))
    assert ok.verdict == Verdict.CONVERGED

    overflow = simulate(load_scenario("ceiling_overflow"))
    assert overflow.verdict == Verdict.OVERFLOW
    assert overflow.saturation_count > 0
    assert any(e.kind == "saturation" for e in overflow.events)
    assert overflow.max_q_arg > ok.max_q_arg


def test_robots_under_heavy_dos(load_scenario):
    scenario = load_scenario("robots_dos")
    assert scenario.gains.rho_g == pytest.approx(0.9493, abs=1e-3)
    assert scenario.dos.averaged_budget().total == pytest.approx(0.836, abs=1e-3)
    trace = simulate(scenario)
    assert trace.verdict == Verdict.CONVERGED
    assert trace.saturation_count == 0
    assert trace.final_error <= 1e-2 * trace.initial_error
    assert trace.theta[-1] <= 1e-2 * trace.theta[0]


@pytest.mark.parametrize("name", ["robots_dos", "ceiling_ok", "baseline", "robots_step_quantized"])
def test_case_dynamics_hold_on_converging_runs(load_scenario, name):
    trace = simulate(load_scenario(name))
    report = case_dynamics_check(trace)
    assert report.ok, report.details


def test_quantized_convergence_speed_close_to_exact(load_scenario):
    quantized = simulate(load_scenario("robots_step_quantized"))
    exact = simulate(load_scenario("robots_step_unquantized"))
    assert quantized.verdict == Verdict.CONVERGED
    assert exact.verdict == Verdict.CONVERGED
    assert any(e.kind == "speed_step" and e.step == 250 for e in quantized.events)

    t_q = settling_time(quantized, 0.01, start=250)
    t_e = settling_time(exact, 0.01, start=250)
    assert t_q is not None and t_e is not None
    assert t_q <= 2 * t_e + 0.1


def test_settling_time_edge_cases(load_scenario):
    trace = simulate(load_scenario("baseline"))
    assert settling_time(trace, 1e6) == 0.0
    assert settling_time(trace, 0.0) is None
