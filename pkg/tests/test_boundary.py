import numpy as np
import pytest
from hypothesis import given, strategies as st

from fronttrack import boundary as bd
from fronttrack.fronts import NON_PHYSICAL, Front
from fronttrack.systems import make_system

BURGERS = make_system("burgers")
BURGERS_MODEL = bd.BoundaryLayerModel(BURGERS)
LINEAR = make_system("linear")
LINEAR_MODEL = bd.BoundaryLayerModel(LINEAR)


@pytest.mark.parametrize("u_plus, u_b, branch, k_strength, xi_k", [
    (0.1, 0.3, "i", 0.2, 0.0),        # shock entering the domain
    (0.3, 0.1, "ii", -0.2, 0.0),      # rarefaction entering the domain
    (0.2, -0.1, "iii", -0.2, -0.1),   # rarefaction from 0, layer for the rest
    (-0.1, 0.3, "iv", 0.4, 0.0),      # shock fast enough to enter
    (-0.1, 0.1, "v", 0.0, 0.2),       # zero-speed shock sits on the boundary
    (-0.2, 0.1, "vi", 0.0, 0.3),      # shock too slow: boundary layer only
])
def test_burgers_boundary_branches(u_plus, u_b, branch, k_strength, xi_k):
    sol = bd.solve_boundary_riemann(BURGERS, BURGERS_MODEL, [u_plus], [u_b])
    assert sol.branch == branch
    assert sol.k_strength == pytest.approx(k_strength, abs=1e-9)
    assert sol.trace.xi_k == pytest.approx(xi_k, abs=1e-9)
    assert bd.trace_residual(BURGERS, BURGERS_MODEL, sol.trace) <= 1e-9
    assert bd.trace_property_holds(BURGERS, BURGERS_MODEL, sol.trace)


def test_zero_speed_shock_reconstructs_the_state_behind_the_layer():
    sol = bd.solve_boundary_riemann(BURGERS, BURGERS_MODEL, [-0.1], [0.1])
    np.testing.assert_allclose(bd.underline_state(BURGERS, BURGERS_MODEL, sol.trace), [0.1],
                               atol=1e-9)


def linear_oracle(u_plus, u_b):
    """Eigen-coordinates of ``u_b - u_plus`` in the stable layer mode and the families k..N."""
    mu, V = np.linalg.eig(np.linalg.solve(LINEAR.D, LINEAR.F))
    v = V[:, mu.real < -1e-12].real
    R = LINEAR.right_vectors(u_plus)[:, 1:]
    return np.linalg.solve(np.column_stack([v, R]), u_b - u_plus)


@given(u_plus=st.lists(st.floats(-0.2, 0.2), min_size=3, max_size=3),
       u_b=st.lists(st.floats(-0.2, 0.2), min_size=3, max_size=3))
def test_linear_boundary_solver_matches_closed_form(u_plus, u_b):
    u_plus, u_b = np.array(u_plus), np.array(u_b)
    sol = bd.solve_boundary_riemann(LINEAR, LINEAR_MODEL, u_plus, u_b)
    expected = linear_oracle(u_plus, u_b)
    # the family strengths do not depend on how the layer mode is normalized
    assert abs(sol.s_k - expected[1]) <= 1e-10
    np.testing.assert_allclose(sol.fan.strengths, expected[2:], atol=1e-10)
    closed = bd.linear_boundary_solution(LINEAR, LINEAR_MODEL, u_plus, u_b)
    np.testing.assert_allclose(sol.strengths, closed, atol=1e-10)
    assert sol.branch == "ld-layer"


def test_model_counts():
    assert (BURGERS_MODEL.k, BURGERS_MODEL.ell, BURGERS_MODEL.stable_count) == (1, 0, 0)
    assert (LINEAR_MODEL.k, LINEAR_MODEL.stable_count) == (2, 1)
    euler = make_system("euler", characteristic_family=1, viscosity="physical")
    model = bd.BoundaryLayerModel(euler)
    assert model.characteristic and model.k == 1
    assert model.stable_count == model.k - 1 - model.ell


@pytest.mark.parametrize("name, params", [
    ("p-system", {"characteristic_family": 1}),
    ("p-system", {"characteristic_family": 2}),
    ("isentropic-euler", {}),
    ("euler", {"characteristic_family": 1, "viscosity": "physical"}),
    ("euler", {"characteristic_family": 2, "viscosity": "identity"}),
])
def test_nonlinear_boundary_solutions_meet_the_datum(name, params):
    system = make_system(name, **params)
    model = bd.BoundaryLayerModel(system)
    rng = np.random.default_rng(3)
    for _ in range(4):
        u_plus, u_b = system.sample_box(2, rng, fraction=0.05)
        sol = bd.solve_boundary_riemann(system, model, u_plus, u_b)
        assert sol.residual <= 1e-9
        assert sol.branch in bd.BRANCHES
        assert bd.trace_property_holds(system, model, sol.trace)


def test_simplified_solver_turns_low_family_into_non_physical():
    system = make_system("p-system", characteristic_family=2)
    model = bd.BoundaryLayerModel(system)
    sol = bd.solve_boundary_riemann(system, model, system.u_star, system.u_star)
    left = system.u_star + np.array([0.01, 0.0])
    hit = Front(1, "shock", 0.01, left, system.u_star.copy(), -1.0)
    fronts, trace, _ = bd.simplified_boundary_fronts(system, model, hit, sol.trace, 3.0)
    assert len(fronts) == 1 and fronts[0].kind == NON_PHYSICAL and fronts[0].speed == 3.0
    np.testing.assert_array_equal(trace.ubar, sol.trace.ubar)


def test_beta_vanishes_on_the_datum(psys):
    model = bd.BoundaryLayerModel(psys)
    assert np.max(np.abs(bd.beta(psys, psys.u_star, psys.u_star, model.basis))) == 0.0
