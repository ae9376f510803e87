import numpy as np
import pytest
from hypothesis import given, strategies as st

from fronttrack import wavecurves as wc
from fronttrack.systems import make_system

GAMMA = 1.4
PSYS = {k: make_system("p-system", gamma=GAMMA, characteristic_family=k) for k in (1, 2)}


def tau_from_sound_speed(c):
    return (c / np.sqrt(GAMMA)) ** (-2.0 / (GAMMA + 1.0))


def closed_form_rarefaction(sy, family, u, s):
    """Rarefaction with lambda changing by s; w follows the Riemann invariant."""
    c0 = sy.sound_speed(u[0])
    c1 = c0 - s if family == 1 else c0 + s
    tau = tau_from_sound_speed(c1)
    a = (1.0 - GAMMA) / 2.0
    integral = 2.0 * np.sqrt(GAMMA) / (1.0 - GAMMA) * (tau ** a - u[0] ** a)
    return np.array([tau, u[1] + integral if family == 1 else u[1] - integral])


states = st.tuples(st.floats(0.9, 1.1), st.floats(-0.05, 0.05)).map(np.array)
strengths = st.floats(-0.1, 0.1).filter(lambda s: abs(s) > 1e-6)


@given(u=states, s=strengths, family=st.sampled_from([1, 2]), frame=st.sampled_from([1, 2]))
def test_p_system_rarefaction_matches_riemann_invariants(u, s, family, frame):
    sy = PSYS[frame]
    got = wc.rarefaction_curve(sy, family, u, s, check_box=False)
    np.testing.assert_allclose(got, closed_form_rarefaction(sy, family, u, s), atol=1e-8, rtol=0)


@given(u=states, s=strengths, family=st.sampled_from([1, 2]), frame=st.sampled_from([1, 2]))
def test_p_system_hugoniot_matches_jump_relations(u, s, family, frame):
    sy = PSYS[frame]
    h = wc.hugoniot(sy, family, u, s, check_box=False)
    tau, w = h.state
    dtau = tau - u[0]
    sigma = np.sqrt(-(sy.pressure(tau) - sy.pressure(u[0])) / dtau)
    w_expected = u[1] + (sigma * dtau if family == 1 else -sigma * dtau)
    speed = -sy.frame_speed + (-sigma if family == 1 else sigma)
    assert abs(w - w_expected) <= 1e-8
    assert abs(h.speed - speed) <= 1e-8


@given(u=states, s=strengths, family=st.sampled_from([1, 2]))
def test_hugoniot_satisfies_rankine_hugoniot(u, s, family):
    sy = PSYS[1]
    h = wc.hugoniot(sy, family, u, s, check_box=False)
    assert wc.rankine_hugoniot_residual(sy, u, h.state, h.speed) <= 1e-10


@given(u=states, s=strengths, family=st.sampled_from([1, 2]))
def test_rarefaction_strength_is_change_in_speed(u, s, family):
    sy = PSYS[2]
    end = wc.rarefaction_curve(sy, family, u, s, check_box=False)
    assert sy.eigenvalue(end, family) - sy.eigenvalue(u, family) == pytest.approx(s, abs=1e-9)


@given(u=states, s=st.floats(0.001, 0.1), family=st.sampled_from([1, 2]))
def test_admissible_shocks_satisfy_lax_inequalities(u, s, family):
    sy = PSYS[1]
    left = wc.fan_state(sy, family, u, s, check_box=False)
    speed = wc.shock_speed(sy, family, u, s)
    assert sy.eigenvalue(left, family) > speed > sy.eigenvalue(u, family)


def test_wave_fan_curve_switches_branch_at_zero(psys):
    u = psys.u_star
    assert wc.wave_fan_curve(psys, 1, u, 0.05).branch == wc.SHOCK
    assert wc.wave_fan_curve(psys, 1, u, -0.05).branch == wc.RAREFACTION
    # both branches leave u tangent to r_1
    d = wc.fan_state(psys, 1, u, 1e-4) - wc.fan_state(psys, 1, u, -1e-4)
    np.testing.assert_allclose(d, 2e-4 * psys.right_vector(u, 1), atol=1e-8)


def test_linear_contact_curve_is_straight(linear):
    u = np.array([0.1, -0.2, 0.05])
    ev = wc.wave_fan_curve(linear, 2, u, 0.3)
    assert ev.branch == wc.CONTACT
    np.testing.assert_allclose(ev.state, u + 0.3 * linear.right_vector(u, 2), atol=1e-15)


def test_zero_speed_shock_strength(psys):
    u = wc.rarefaction_curve(psys, 1, psys.u_star, -0.02)
    su = wc.underline_s(psys, u)
    assert su > 0
    assert abs(wc.shock_speed(psys, 1, u, su)) <= 1e-10


def test_zero_characteristic_parameter(psys):
    u = wc.rarefaction_curve(psys, 1, psys.u_star, 0.03)
    sb = wc.bar_s(psys, u)
    assert sb == pytest.approx(-0.03, abs=1e-9)


def test_right_state_curve_inverts_fan_curve(psys):
    left = np.array([1.02, 0.01])
    for s in (-0.05, 0.04):
        right = wc.right_state_curve(psys, 2, left, s)
        np.testing.assert_allclose(wc.fan_state(psys, 2, right, -s, check_box=False), left,
                                   atol=1e-11)


def test_strength_outside_range_is_rejected(psys):
    with pytest.raises(ValueError):
        wc.rarefaction_curve(psys, 1, psys.u_star, 0.9)
    with pytest.raises(ValueError):
        wc.hugoniot(psys, 1, psys.u_star, float("nan"))
