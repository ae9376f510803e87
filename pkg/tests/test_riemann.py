import numpy as np
import pytest
from hypothesis import given, strategies as st

from fronttrack import riemann
from fronttrack.fronts import NON_PHYSICAL, RAREFACTION, SHOCK, Front
from fronttrack.systems import make_system

PSYS = make_system("p-system", gamma=1.4, characteristic_family=1)
LINEAR = make_system("linear")
states = st.tuples(st.floats(0.9, 1.1), st.floats(-0.05, 0.05)).map(np.array)


@given(a=states, b=states)
def test_fan_joins_the_two_states(a, b):
    fan = riemann.solve_riemann(PSYS, a, b)
    np.testing.assert_allclose(riemann.compose(PSYS, fan.strengths, b)[0], a, atol=1e-11)
    assert fan.residual <= 1e-11


@given(a=st.lists(st.floats(-0.12, 0.12), min_size=3, max_size=3),
       b=st.lists(st.floats(-0.12, 0.12), min_size=3, max_size=3))
def test_linear_strengths_are_eigen_coordinates(a, b):
    a, b = np.array(a), np.array(b)
    fan = riemann.solve_riemann(LINEAR, a, b)
    expected = np.linalg.solve(LINEAR.right_vectors(b), a - b)
    np.testing.assert_allclose(fan.strengths, expected, atol=1e-11)


def test_burgers_shock_speed_is_mean_value(burgers):
    fan = riemann.solve_riemann(burgers, [1.0], [0.0], s_max=2.0)
    assert fan.strengths[0] == pytest.approx(1.0)
    fronts = riemann.wave_fronts(burgers, 1, 0.4, [0.4], [0.0], r_eps=0.1)
    assert len(fronts) == 1 and fronts[0].kind == SHOCK
    assert fronts[0].speed == pytest.approx(0.2, abs=1e-12)


def test_equal_states_give_empty_fan(psys):
    fan = riemann.solve_riemann(psys, psys.u_star, psys.u_star)
    assert not np.any(fan.strengths)
    assert riemann.accurate_fronts(psys, fan, 0.01) == []


@given(s=st.floats(-0.1, -0.001), r=st.floats(0.005, 0.05))
def test_rarefactions_are_split_into_pieces_below_r(s, r):
    right = PSYS.u_star
    left = riemann.compose(PSYS, [s, 0.0], right)[0]
    fronts = riemann.wave_fronts(PSYS, 1, s, left, right, r)
    assert len(fronts) == int(np.ceil(abs(s) / r - 1e-12))
    assert all(f.kind == RAREFACTION and abs(f.strength) <= r + 1e-12 for f in fronts)
    assert sum(f.strength for f in fronts) == pytest.approx(s, abs=1e-12)
    np.testing.assert_array_equal(fronts[0].left_state, left)
    np.testing.assert_array_equal(fronts[-1].right_state, right)
    for a, b in zip(fronts, fronts[1:]):
        np.testing.assert_array_equal(a.right_state, b.left_state)
        assert a.speed <= b.speed


def test_exempt_family_is_not_split(psys):
    u_minus = np.array([1.0, -0.06])
    fan = riemann.solve_riemann(psys, u_minus, psys.u_star)
    families = [f.family for f in riemann.accurate_fronts(psys, fan, 0.01)]
    exempt = [f.family for f in riemann.accurate_fronts(psys, fan, 0.01, exempt_families=(1, 2))]
    assert len(families) > len(exempt)
    assert exempt == sorted(exempt)


def _front(system, family, s, right, x=0.0):
    left = riemann.compose(system, [s if i == family else 0.0 for i in range(1, system.N + 1)],
                           right)[0]
    kind = riemann.wave_kind(system, family, s)
    return Front(family, kind, s, left, np.asarray(right, float), 0.0, position=x)


def test_simplified_solver_keeps_strengths_and_carries_the_error(psys):
    b = _front(psys, 1, 0.02, psys.u_star)
    a = _front(psys, 2, 0.03, b.left_state)
    out = riemann.simplified_fronts(psys, a, b, lambda_hat=2.0)
    physical = [f for f in out if f.physical]
    assert [f.family for f in physical] == [1, 2]
    assert [f.strength for f in physical] == pytest.approx([0.02, 0.03])
    np.testing.assert_array_equal(out[0].left_state, a.left_state)
    np.testing.assert_array_equal(out[-1].right_state, b.right_state)
    np_fronts = [f for f in out if f.kind == NON_PHYSICAL]
    assert len(np_fronts) == 1 and np_fronts[0].speed == 2.0
    assert np_fronts[0].strength == pytest.approx(np_fronts[0].amplitude())


def test_simplified_solver_merges_same_family(psys):
    b = _front(psys, 1, 0.02, psys.u_star)
    a = _front(psys, 1, 0.01, b.left_state)
    out = riemann.simplified_fronts(psys, a, b, lambda_hat=2.0)
    assert [f.strength for f in out if f.physical] == pytest.approx([0.03])
