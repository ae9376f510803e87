import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fronttrack import functionals as fn
from fronttrack.fronts import NON_PHYSICAL, RAREFACTION, SHOCK, Front

Z2 = np.zeros(2)


def front(family, kind, s, varsigma=None):
    f = Front(family, kind, s, Z2.copy(), Z2 + abs(s), 0.0)
    if varsigma is not None:
        f.meta["varsigma"] = varsigma
    return f


def test_raw_components_by_hand():
    # k = 2 on a 3-family system; positions left to right
    fronts = [front(3, SHOCK, 0.1), front(1, SHOCK, 0.2), front(2, RAREFACTION, -0.05, 0.3),
              Front(4, NON_PHYSICAL, 0.0, Z2.copy(), np.array([0.01, 0.02]), 5.0)]
    raw = fn.raw_components(fronts, xi_k=-0.4, k=2, k_kind="genuinely-nonlinear", z=0.7,
                            f=0.9, t=1.0, gnl_families=(1, 2, 3))
    assert raw.xi == 0.4
    assert raw.v_lo == pytest.approx(0.2)
    assert raw.v_hi == pytest.approx(0.15)
    assert raw.v_np == pytest.approx(0.03)
    # approaching: (3,1), (3,2); 1 and 2 do not approach; the non-physical front has the top family
    assert raw.q_lh == pytest.approx(0.1 * 0.2)
    assert raw.q_hh == pytest.approx(0.1 * 0.05)
    assert raw.q_ll == 0.0
    assert raw.r_k == pytest.approx(0.05)
    assert raw.s == pytest.approx(0.0)   # varsigma positive: no negative part
    c = fn.FunctionalConstants(A_weight=3.0, K1=2.0, K2=5.0, K3=7.0, K4=11.0)
    snap = raw.combine(c)
    V = 0.4 + 3.0 * 0.2 + 0.15 + 0.03
    Q = 3.0 * 0.02 + 0.005
    R = 0.4 * (3.0 * 0.2 + 0.05)
    assert snap.V == pytest.approx(V)
    assert snap.Q == pytest.approx(Q)
    assert snap.R == pytest.approx(R)
    assert snap.Upsilon == pytest.approx(V + 2.0 * Q + 2.0 * R + 7.0 * 0.7)
    assert snap.Lambda == pytest.approx(0.9 + 11.0 * snap.Upsilon)


def test_speed_weighted_term_uses_negative_part():
    raw = fn.raw_components([front(1, SHOCK, 0.1, varsigma=-0.3)], 0.0, 1, "genuinely-nonlinear",
                            0.0, 0.0, 0.0, (1,))
    assert raw.s == pytest.approx(0.03)


def test_same_family_rarefactions_do_not_approach():
    a, b = front(2, RAREFACTION, -0.1), front(2, RAREFACTION, -0.1)
    assert not fn.approaching(a, b, k=1, gnl_families=(1, 2))
    assert fn.approaching(a, front(2, SHOCK, 0.1), k=1, gnl_families=(1, 2))
    assert fn.approaching(front(1, RAREFACTION, -0.1), front(1, RAREFACTION, -0.1), k=1)


@pytest.mark.parametrize("event, bound", [
    ({"kind": "collision", "magnitudes": [0.1, -0.2]}, -0.02),
    ({"kind": "datum", "datum_jump": 0.3}, -0.3),
    ({"kind": "boundary", "magnitudes": [0.2], "hitting_class": "low"}, -0.2),
    ({"kind": "boundary", "magnitudes": [0.2], "hitting_class": "k", "solver": "accurate",
      "varsigma_minus": 0.1, "xi_k_before": -0.05}, -0.2 * 0.15),
    ({"kind": "boundary", "magnitudes": [0.2], "hitting_class": "k", "solver": "simplified",
      "varsigma_minus": 0.1, "xi_k_before": 0.0}, 0.0),
])
def test_event_bounds(event, bound):
    assert fn.event_bound(event) == pytest.approx(bound)


def _snap(ups, lam=0.0):
    return fn.FunctionalSnapshot(0.0, ups, 0, 0, 0, 0, ups, 0.0, lam, 0.0)


def test_decrease_check_applies_slack():
    event = {"kind": "collision", "magnitudes": [0.1, 0.1]}
    ok = fn.check_event_decrease(_snap(1.0), _snap(1.0 - 0.01 / 1.05), event)
    bad = fn.check_event_decrease(_snap(1.0), _snap(1.0 - 0.009), event)
    assert ok["passed"] and not bad["passed"]
    up = fn.check_event_decrease(_snap(1.0, 1.0), _snap(0.9, 1.1), event)
    assert not up["lambda_passed"]


@given(st.lists(st.tuples(st.sampled_from([1, 2, 3]), st.floats(-0.1, 0.1)), max_size=8),
       st.floats(1.0, 4.0))
def test_functional_is_nonnegative_and_grows_with_weights(items, factor):
    fronts = [front(f, SHOCK if s > 0 else RAREFACTION, s) for f, s in items]
    raw = fn.raw_components(fronts, 0.01, 2, "genuinely-nonlinear", 0.1, 0.0, 0.0, (1, 2, 3))
    c = fn.FunctionalConstants()
    base = raw.combine(c).Upsilon
    assert base >= 0.0
    for name in ("A_weight", "K1", "K2", "K3"):
        assert raw.combine(c.scaled(**{name: factor})).Upsilon >= base - 1e-15


def test_recipe_constants_are_monotone_in_measurements():
    low = fn.recipe_constants({"C1": 1.0, "C2": 1.0, "C7": 1.0})
    high = fn.recipe_constants({"C1": 2.0, "C2": 3.0, "C7": 1.0})
    assert high.A_weight >= low.A_weight and high.K1 >= low.K1 and high.K2 >= low.K2
    assert high.delta <= low.delta


def test_fit_to_events_doubles_until_events_pass():
    before = fn.RawFunctionals(t=0.0, q_hh=0.01, v_hi=0.1)
    after = fn.RawFunctionals(t=0.0, q_hh=0.0, v_hi=0.105)
    event = {"kind": "collision", "magnitudes": [0.1, 0.1], "raw_before": before,
             "raw_after": after}
    start = fn.FunctionalConstants(K1=0.1)
    fitted, report = fn.fit_to_events(start, [event])
    assert report["doublings"] > 0 and report["failures"] == 0
    assert all(v["passed"] for v in fn.evaluate_events([event], fitted))


def test_fit_to_events_reports_hopeless_logs():
    before = fn.RawFunctionals(t=0.0, v_hi=0.1)
    after = fn.RawFunctionals(t=0.0, v_hi=0.2)
    event = {"kind": "collision", "magnitudes": [0.1, 0.1], "raw_before": before,
             "raw_after": after}
    with pytest.raises(fn.CalibrationFailure):
        fn.fit_to_events(fn.FunctionalConstants(), [event])


def test_constants_round_trip():
    c = fn.FunctionalConstants(A_weight=5.0, measured_C={"C1": 2.0})
    assert fn.FunctionalConstants.from_dict({**c.as_dict(), "extra": 1}) == c


def test_rarefaction_constant():
    assert fn.rarefaction_constant(0.009, 0.01) == pytest.approx(0.9)
    assert math.isinf(fn.rarefaction_constant(0.1, 0.0))
