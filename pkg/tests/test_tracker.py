import numpy as np
import pytest

from fronttrack import functionals as fn
from fronttrack import tracker, verify
from fronttrack.scenario import Scenario, ScenarioError
from fronttrack.tracker import PiecewiseConstant, approximate_data


def burgers_scenario(**changes):
    data = {"name": "burgers-shock", "system": {"id": "burgers"},
            "u0": {"breaks": [], "values": [[0.0]]},
            "ub": {"breaks": [], "values": [[0.3]]},
            "eps": 0.01, "t_end": 1.0, "x_max": 1.0, "snapshot_times": [1.0], "seed": 2}
    data.update(changes)
    return Scenario.from_dict(data)


def test_boundary_shock_moves_at_the_rankine_hugoniot_speed():
    traj = tracker.simulate(burgers_scenario())
    xs, states = traj.snapshots[1.0]
    assert len(xs) == 1 and xs[0] == pytest.approx(0.15, abs=1e-9)
    np.testing.assert_allclose(np.ravel(states), [0.3, 0.0])


def test_event_log_is_time_ordered_and_complete():
    sc = burgers_scenario(u0={"breaks": [0.2, 0.5], "values": [[0.4], [0.1], [0.3]]},
                          ub={"breaks": [0.4], "values": [[0.2], [-0.1]]}, t_end=3.0, x_max=2.0)
    traj = tracker.simulate(sc)
    times = [e["t"] for e in traj.events]
    assert times == sorted(times)
    assert {e["kind"] for e in traj.events} <= {"collision", "boundary", "datum"}
    assert any(e["kind"] == "datum" for e in traj.events)
    assert traj.diagnostics["events"] == len(traj.events)
    for e in traj.events:
        assert e["raw_after"].t == e["raw_before"].t


def test_reruns_are_identical():
    sc = Scenario.load("scenarios/p_system.json")
    a = tracker.simulate(sc, eps=0.02)
    b = tracker.simulate(sc, eps=0.02)
    assert [e["t"] for e in a.events] == [e["t"] for e in b.events]
    assert [r.as_dict() for r in a.raw_series] == [r.as_dict() for r in b.raw_series]


def test_event_cap_aborts():
    sc = Scenario.load("scenarios/p_system.json")
    with pytest.raises(tracker.EventCapExceeded):
        tracker.simulate(sc, cap=3)


def test_burgers_matches_the_exact_solution():
    sc = Scenario.load("scenarios/burgers_reflection.json")
    sc = sc.__class__(**{**sc.__dict__, "snapshot_times": [1.0]})
    system = sc.make_system()
    traj = tracker.simulate(sc, system=system, eps=0.01)
    u0, ub = sc.data(system)
    grid = np.linspace(0.0, sc.x_max, 4001)[1:]
    exact = verify.exact_scalar(u0, ub, 1.0, grid)
    err = verify.l1_distance(traj.snapshots[1.0], (grid, exact), (grid[0], sc.x_max))
    assert err <= 5 * 0.01 * (u0.total_variation() + ub.total_variation() + 1.0)


def test_retired_fronts_carry_their_cause():
    traj = tracker.simulate(Scenario.load("scenarios/burgers_reflection.json"))
    causes = {r["cause"] for r in traj.retired}
    assert causes and causes <= {"exit", "collision", "boundary"}


def test_run_scores_every_event_with_calibrated_constants():
    sc = Scenario.load("scenarios/linear_3x3.json")
    traj = tracker.run(sc)
    assert len(traj.verdicts) == len(traj.events) > 0
    assert traj.diagnostics["all_passed"]
    assert traj.diagnostics["upsilon0"] <= traj.constants.delta


def test_enforced_delta_rejects_large_data():
    sc = Scenario.load("scenarios/linear_3x3.json")
    small = fn.FunctionalConstants(delta=1e-6)
    with pytest.raises(tracker.DataTooLarge):
        tracker.run(sc, constants=small, enforce_delta=True)


def test_piecewise_constant_evaluation_and_variation():
    pc = PiecewiseConstant([0.5, 1.0], [[1.0], [3.0], [2.0]])
    assert pc(0.2)[0] == 1.0 and pc(0.5)[0] == 3.0 and pc(2.0)[0] == 2.0
    assert pc.total_variation() == 3.0
    assert pc.total_variation(start=0.7) == 1.0
    with pytest.raises(ValueError):
        PiecewiseConstant([1.0, 0.5], [[0.0], [1.0], [2.0]])


def test_smooth_data_staircase_is_eps_close_and_keeps_variation():
    u0 = lambda x: np.array([0.1 * np.sin(3 * x)])
    ub = lambda t: np.array([0.05 * t])
    a, b, info = approximate_data(u0, ub, 0.01, x_max=2.0, t_max=1.0)
    xs = np.linspace(0, 2.0, 20001)
    err = np.mean([abs(a(x)[0] - u0(x)[0]) for x in xs]) * 2.0
    assert err <= 0.01
    fine = np.sum(np.abs(np.diff(0.1 * np.sin(3 * xs))))
    assert a.total_variation() <= fine + 1e-12
    assert info["ub_tv"] <= 0.05 + 1e-12


def test_scenario_validation():
    with pytest.raises(ScenarioError):
        Scenario.from_dict({"system": {"id": "burgers"}, "seed": 0})
    bad = {"name": "x", "system": {"id": "burgers"}, "u0": {"breaks": [], "values": [[0.0]]},
           "ub": {"breaks": [], "values": [[0.0]]}}
    with pytest.raises(ScenarioError, match="seed"):
        Scenario.from_dict(bad)
    with pytest.raises(ScenarioError):
        Scenario.from_dict({**bad, "seed": 0, "eps": -1})
    sc = burgers_scenario()
    assert Scenario.from_dict(sc.to_dict()).to_dict() == sc.to_dict()


def test_epsilon_overrides_scale_with_eps():
    sc = burgers_scenario(omega_eps=1e-6, r_eps=0.02)
    p = sc.epsilon_params(0.005)
    assert p.omega_eps == pytest.approx(0.25e-6) and p.r_eps == pytest.approx(0.01)
    resolved = sc.epsilon_params().resolved(sc.make_system())
    assert resolved.lambda_hat > sc.make_system().max_speed()
