import numpy as np
import pytest
from hypothesis import given, strategies as st

from fronttrack import systems
from fronttrack.systems import GNL, LD, make_system

SYSTEM_ARGS = [
    ("burgers", {}),
    ("p-system", {"characteristic_family": 1}),
    ("p-system", {"characteristic_family": 2}),
    ("isentropic-euler", {}),
    ("euler", {"characteristic_family": 1, "viscosity": "physical"}),
    ("euler", {"characteristic_family": 2, "viscosity": "identity"}),
    ("linear", {}),
]


@pytest.fixture(params=SYSTEM_ARGS, ids=lambda a: f"{a[0]}-{'-'.join(map(str, a[1].values()))}")
def system(request):
    name, params = request.param
    return make_system(name, **params)


def test_hypotheses_hold_on_working_box(system):
    report = systems.check_hypotheses(system, samples=12)
    assert report.passed, report.failures()
    assert report.spectral_gap > 0


def test_reference_state_has_one_vanishing_speed(system):
    k = systems.boundary_char_family(system)
    assert abs(system.eigenvalue(system.u_star, k)) <= 1e-10
    lam = system.eigenvalues(system.u_star)
    assert np.all(np.diff(lam) > 0)


def test_right_vectors_are_eigenvectors_with_unit_speed_derivative(system, rng):
    for u in system.sample_box(5, rng, fraction=0.5):
        A = system.quasilinear(u)
        for i in range(1, system.N + 1):
            r = system.right_vector(u, i)
            lam = system.eigenvalue(u, i)
            np.testing.assert_allclose(A @ r, lam * r, atol=1e-9 * (1 + np.abs(r).max()))
            slope = system.lambda_gradient(u, i) @ r
            if system.field_kinds[i - 1] == GNL:
                assert slope == pytest.approx(1.0, abs=1e-5)
            else:
                assert abs(slope) <= 1e-6


def test_left_vectors_are_biorthonormal(system):
    eig = system.eigen(system.u_star)
    np.testing.assert_allclose(eig.left @ eig.right, np.eye(system.N), atol=1e-10)


def test_conservative_and_primitive_round_trip(system, rng):
    for u in system.sample_box(4, rng):
        np.testing.assert_allclose(system.from_v(system.to_v(u)), u, rtol=1e-12, atol=1e-14)


def test_unknown_system_is_rejected():
    with pytest.raises(ValueError, match="unknown system"):
        make_system("shallow-water")


def test_linear_system_requires_symmetric_flux():
    with pytest.raises(ValueError):
        make_system("linear", F=[[0.0, 1.0], [0.0, 0.0]], D=np.eye(2))


def test_field_classification(psys, linear):
    grid = psys.sample_box(6, np.random.default_rng(1))
    assert systems.classify_field(psys, 1, grid)[0] == GNL
    assert systems.classify_field(linear, 2, linear.sample_box(4, np.random.default_rng(1)))[0] == LD


@given(tau=st.floats(0.8, 1.2), w=st.floats(-0.2, 0.2))
def test_p_system_speeds_closed_form(tau, w):
    sy = make_system("p-system", gamma=1.4, characteristic_family=2)
    c = np.sqrt(1.4) * tau ** (-1.2)
    np.testing.assert_allclose(sy.eigenvalues(np.array([tau, w])),
                               [-sy.frame_speed - c, -sy.frame_speed + c], rtol=1e-12)
