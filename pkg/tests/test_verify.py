import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fronttrack import boundary as bd
from fronttrack import tracker, verify
from fronttrack.scenario import Scenario
from fronttrack.systems import make_system


def test_exact_scalar_boundary_shock():
    x = np.linspace(0.01, 1.0, 200)
    u = verify.exact_scalar(([], [0.0]), ([], [0.3]), 1.0, x)
    np.testing.assert_allclose(u, np.where(x < 0.15, 0.3, 0.0), atol=1e-3)


def test_exact_scalar_rarefaction_from_boundary():
    x = np.linspace(0.01, 1.0, 200)
    u = verify.exact_scalar(([], [0.4]), ([], [0.0]), 1.0, x)
    np.testing.assert_allclose(u, np.clip(x, 0.0, 0.4), atol=2e-3)


def test_exact_scalar_keeps_outgoing_wave_away_from_boundary():
    # negative speeds leave through the boundary; a layer absorbs the datum
    x = np.linspace(0.01, 1.0, 100)
    u = verify.exact_scalar(([], [-0.2]), ([], [0.1]), 1.0, x)
    np.testing.assert_allclose(u, -0.2, atol=1e-3)


@pytest.mark.parametrize("u0, ub", [
    (([0.3, 0.6], [0.2, -0.1, 0.3]), ([0.5], [0.1, -0.2])),
    (([0.4], [-0.3, 0.2]), ([0.2, 0.7], [0.4, 0.0, 0.25])),
])
def test_exact_scalar_agrees_with_godunov(u0, ub):
    xc, ug = verify.godunov_burgers(u0, ub, 1.0, 2.0, cells=4000)
    ue = verify.exact_scalar(u0, ub, 1.0, xc)
    assert np.mean(np.abs(ug - ue)) * 2.0 <= 5e-3


def test_l1_distance_of_steps_is_exact():
    a = ([0.5], [[0.0], [1.0]])
    b = ([0.25], [[0.0], [1.0]])
    assert verify.l1_distance(a, b, (0.0, 1.0)) == pytest.approx(0.25, abs=1e-15)
    assert verify.l1_distance(a, lambda x: np.zeros_like(x), (0.0, 1.0)) == pytest.approx(0.5, abs=1e-4)


def test_layer_boundary_value_on_a_linear_system():
    sy = make_system("linear")
    model = bd.BoundaryLayerModel(sy)
    w = np.array([0.05, -0.1, 0.02])
    mu, V = model.spectrum(w)
    j = int(np.argmin(mu))
    for eta in (0.1, -0.03):
        got = verify.layer_boundary_value(sy, model, w, [eta])
        # integration error sits far below the boundary-condition tolerance of 1e-6
        np.testing.assert_allclose(got, w + eta * V[:, j], rtol=0, atol=2e-8)
        tight = verify.layer_boundary_value(sy, model, w, [eta], rtol=1e-13)
        np.testing.assert_allclose(tight, w + eta * V[:, j], rtol=0, atol=3e-9)
    # the stable mode is an eigenvector of D^-1 F with a negative rate
    M = np.linalg.solve(sy.D, sy.F)
    np.testing.assert_allclose(M @ V[:, j], mu[j] * V[:, j], atol=1e-10)
    assert mu[j] < 0


@pytest.mark.parametrize("u_plus, u_b", [(0.1, 0.3), (0.3, 0.1), (0.2, -0.1), (-0.2, 0.1),
                                         (-0.1, 0.1)])
def test_boundary_layer_residual_of_solved_traces(u_plus, u_b):
    sy = make_system("burgers")
    model = bd.BoundaryLayerModel(sy)
    sol = bd.solve_boundary_riemann(sy, model, [u_plus], [u_b])
    res = verify.boundary_layer_residual(sy, model, sol.trace.ubar, [u_b], sol.trace.xi_k)
    assert res["residual"] <= 1e-6
    if res["flagged"]:
        assert res["rh_residual"] <= 1e-8


def test_boundary_condition_fails_for_a_wrong_datum():
    sy = make_system("burgers")
    model = bd.BoundaryLayerModel(sy)
    # a trace with positive speed admits no layer to a different datum
    res = verify.boundary_layer_residual(sy, model, [0.3], [0.1], 0.0)
    assert res["residual"] > 1e-3


def test_trajectory_boundary_check_on_linear_run():
    sc = Scenario.load("scenarios/linear_3x3.json")
    system = sc.make_system()
    traj = tracker.simulate(sc, system=system)
    _, ub = sc.data(system)
    rep = verify.check_trajectory_boundary(traj, system, ub, sc.eps, samples=10)
    assert rep.admissible > 0 and rep.fraction == 1.0


def test_applicable_estimates():
    assert verify.applicable_estimates(make_system("linear")) == ["nc", "melindeg", "jd1",
                                                                   "iebressan"]
    psys2 = make_system("p-system", characteristic_family=2)
    assert "pallido2" in verify.applicable_estimates(psys2)
    assert "rarepiccola" in verify.applicable_estimates(make_system("p-system"))


def test_estimate_report_is_finite_and_serializable():
    rep = verify.measure_estimate(make_system("linear"), "nc", {"samples": 20, "seed": 1})
    assert rep.sample_count == 20 and rep.finite
    d = rep.as_dict()
    assert "rows" not in d and d["estimate_id"] == "nc"
    with pytest.raises(ValueError):
        verify.measure_estimate(make_system("linear"), "bogus")


def test_zero_right_hand_side_samples_have_no_left_hand_side():
    rep = verify.measure_estimate(make_system("p-system"), "me", {"samples": 40, "seed": 2})
    assert rep.zero_rhs_count > 0
    assert rep.max_violation <= 1e-6


def test_convergence_study_requires_decreasing_eps():
    sc = Scenario.load("scenarios/linear_3x3.json")
    with pytest.raises(ValueError):
        verify.convergence_study(sc, [0.01, 0.02])


def test_convergence_study_rows():
    sc = Scenario.load("scenarios/linear_3x3.json")
    rows = verify.convergence_study(sc, [0.04, 0.02], time=1.0)
    assert [r["eps"] for r in rows] == [0.04, 0.02]
    assert rows[0]["cauchy_l1"] >= 0 and math.isnan(rows[-1]["cauchy_l1"])


@given(st.lists(st.integers(-100, 100), max_size=6))
def test_parallel_map_preserves_order(items):
    assert verify.parallel_map(abs, items) == [abs(i) for i in items]


def test_worker_count_reads_environment(monkeypatch):
    monkeypatch.setenv("FRONTTRACK_THREADS", "3")
    assert verify.worker_count() == 3
    monkeypatch.setenv("FRONTTRACK_THREADS", "many")
    assert verify.worker_count() == 1
