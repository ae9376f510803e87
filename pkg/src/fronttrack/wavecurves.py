"""Elementary wave curves of the hyperbolic part.

Strength conventions follow the left-state wave fan curves: ``t_i(u, s)`` is
the state that can be joined *on the left* of ``u`` by an admissible
``i``-wave of strength ``s``. For genuinely nonlinear families negative
strengths are rarefactions and positive strengths are shocks; with the
normalization ``grad(lambda_i) . r_i = 1`` a rarefaction of strength ``s``
changes the characteristic speed by exactly ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._numerics import NewtonDivergence, damped_newton, rk4_path
from .systems import GNL, ConservationSystem, boundary_char_family

RAREFACTION = "rarefaction"
SHOCK = "shock"
CONTACT = "contact"

S_MAX = 0.5
HUGONIOT_STEP = 0.05
RAREFACTION_STEPS_PER_SMAX = 128


class ContinuationFailure(RuntimeError):
    """Newton correction on the Rankine-Hugoniot set stalled."""


class NoRoot(ValueError):
    """A speed does not change sign on the admissible strength range."""


@dataclass(frozen=True)
class CurveEval:
    """A point on a wave curve with the speed attached to it."""

    state: np.ndarray
    speed: float
    branch: str


def _check_strength(s: float, s_max: float) -> None:
    if not np.isfinite(s) or abs(s) > s_max:
        raise ValueError(f"strength {s} outside [-{s_max}, {s_max}]")


def rarefaction_curve(system: ConservationSystem, family: int, u, s: float,
                      s_max: float = S_MAX, check_box: bool = True) -> np.ndarray:
    """Integral curve of ``r_family`` through ``u`` evaluated at parameter ``s``."""
    _check_strength(s, s_max)
    u = np.asarray(u, dtype=float)
    if s == 0.0:
        return u.copy()
    if system.linear:
        out = u + s * system.right_vector(u, family)
    else:
        out = rk4_path(lambda y: system.right_vector(y, family), u, s,
                       s_max / RAREFACTION_STEPS_PER_SMAX)
    if check_box:
        system.require_in_box(out)
    return out


def _rh_residual(system: ConservationSystem, u0, u1, speed: float) -> np.ndarray:
    return (system.flux(u1) - system.flux(u0)) - speed * (system.conserved(u1) - system.conserved(u0))


def rankine_hugoniot_residual(system: ConservationSystem, u0, u1, speed: float) -> float:
    """Max-norm of ``F(u1) - F(u0) - speed (q(u1) - q(u0))``."""
    return float(np.max(np.abs(_rh_residual(system, np.asarray(u0, float),
                                            np.asarray(u1, float), speed))))


def hugoniot(system: ConservationSystem, family: int, u, s: float,
             s_max: float = S_MAX, check_box: bool = True) -> CurveEval:
    """Hugoniot locus of ``u`` for ``family`` and the shock speed.

    The locus is parametrized by ``l_i(u) . (h - u) = s`` (so that its
    tangent at ``s = 0`` is ``r_i(u)``) and followed by predictor-corrector
    continuation. The unknowns are the secant direction ``d = (h - u)/s``
    and the speed, which keeps the Newton system regular at small ``s``.
    """
    _check_strength(s, s_max)
    u = np.asarray(u, dtype=float)
    eig = system.eigen(u)
    r = eig.right[:, family - 1]
    lam = float(eig.lambdas[family - 1])
    if s == 0.0:
        return CurveEval(u.copy(), lam, SHOCK)
    if system.linear:
        return CurveEval(u + s * r, lam, CONTACT)
    l = eig.left[family - 1]
    q0 = system.conserved(u)
    F0 = system.flux(u)
    half_slope = 0.5 if system.field_kinds[family - 1] == GNL else 0.0

    def residual(x, step):
        d, sig = x[:-1], x[-1]
        hs = u + step * d
        g = (system.flux(hs) - F0 - sig * (system.conserved(hs) - q0)) / step
        return np.concatenate([g, [l @ d - 1.0]])

    def jacobian(x, step):
        d, sig = x[:-1], x[-1]
        hs = u + step * d
        J = np.zeros((system.N + 1, system.N + 1))
        J[:-1, :-1] = system.dflux(hs) - sig * system.dq(hs)
        J[:-1, -1] = -(system.conserved(hs) - q0) / step
        J[-1, :-1] = l
        return J

    if abs(s) < 1e-9:
        hs = u + s * r
        return CurveEval(hs, lam + half_slope * s, SHOCK)

    # the residual is divided by the step, so rounding noise grows like 1/|step|
    noise = 1e-15 * (1.0 + np.max(np.abs(F0)) + np.max(np.abs(q0)))
    n_steps = max(1, int(np.ceil(abs(s) / HUGONIOT_STEP)))
    x = np.concatenate([r, [lam]])
    prev_x, prev_step = None, 0.0
    done = 0.0
    target_step = s / n_steps
    step_size = target_step
    while abs(done) < abs(s) * (1 - 1e-14):
        step = done + step_size
        if abs(step) > abs(s):
            step = s
        if prev_x is None:
            guess = x.copy()
            guess[-1] = lam + half_slope * step
        else:
            slope = (x - prev_x) / (done - prev_step) if done != prev_step else 0.0
            guess = x + slope * (step - done)
        try:
            new_x, res, _ = damped_newton(lambda y: residual(y, step), guess,
                                          tol=max(1e-12, noise / abs(step)),
                                          jac=lambda y: jacobian(y, step))
        except (NewtonDivergence, np.linalg.LinAlgError, FloatingPointError):
            step_size *= 0.5
            if abs(step_size) < 1e-6 * abs(s):
                raise ContinuationFailure(f"family {family}, s={s}, stalled at {done}") from None
            continue
        prev_x, prev_step = x, done
        x, done = new_x, step
    hs = u + s * x[:-1]
    if check_box:
        system.require_in_box(hs)
    return CurveEval(hs, float(x[-1]), SHOCK)


def wave_fan_curve(system: ConservationSystem, family: int, u, s: float,
                   s_max: float = S_MAX, check_box: bool = True) -> CurveEval:
    """Left state of an admissible ``family``-wave of strength ``s`` with right state ``u``."""
    if system.field_kinds[family - 1] != GNL:
        state = rarefaction_curve(system, family, u, s, s_max, check_box)
        return CurveEval(state, system.eigenvalue(u, family), CONTACT)
    if s > 0:
        return hugoniot(system, family, u, s, s_max, check_box)
    state = rarefaction_curve(system, family, u, s, s_max, check_box)
    return CurveEval(state, system.eigenvalue(state, family), RAREFACTION)


def fan_state(system: ConservationSystem, family: int, u, s: float, **kw) -> np.ndarray:
    """State part of :func:`wave_fan_curve`."""
    return wave_fan_curve(system, family, u, s, **kw).state


def varsigma(system: ConservationSystem, u, s: float, family: int | None = None) -> float:
    """Shock speed for ``s >= 0``, characteristic speed of the left state for ``s < 0``."""
    k = boundary_char_family(system) if family is None else family
    if s >= 0:
        return hugoniot(system, k, u, s).speed if s > 0 else system.eigenvalue(u, k)
    return system.eigenvalue(rarefaction_curve(system, k, u, s), k)


def shock_speed(system: ConservationSystem, family: int, u, s: float) -> float:
    return hugoniot(system, family, u, s, check_box=False).speed


def underline_s(system: ConservationSystem, u, family: int | None = None,
                s_max: float = S_MAX, tol: float = 1e-10) -> float:
    """Strength of the zero-speed shock with right state ``u``."""
    k = boundary_char_family(system) if family is None else family
    u = np.asarray(u, dtype=float)
    lam = system.eigenvalue(u, k)
    if lam == 0.0:
        return 0.0

    def speed(s):
        return shock_speed(system, k, u, s)

    s = float(np.clip(-2.0 * lam, -s_max, s_max))
    g = speed(s)
    s_prev, g_prev = 0.0, lam
    for _ in range(30):
        if abs(g) <= tol:
            return s
        if g == g_prev:
            break
        s_new = s - g * (s - s_prev) / (g - g_prev)
        s_new = float(np.clip(s_new, -s_max, s_max))
        s_prev, g_prev = s, g
        s, g = s_new, speed(s_new)
    lo, hi = (0.0, s_max) if lam < 0 else (-s_max, 0.0)
    try:
        if np.sign(speed(lo)) == np.sign(speed(hi)):
            raise NoRoot(f"shock speed keeps its sign on [{lo}, {hi}]")
        return float(brentq(speed, lo, hi, xtol=1e-14, rtol=1e-14))
    except ValueError as exc:
        raise NoRoot(str(exc)) from None


def bar_s(system: ConservationSystem, u, family: int | None = None,
          s_max: float = S_MAX, tol: float = 1e-10) -> float:
    """Parameter where the characteristic speed vanishes along the rarefaction curve."""
    k = boundary_char_family(system) if family is None else family
    u = np.asarray(u, dtype=float)
    lam = system.eigenvalue(u, k)
    s = -lam
    if abs(s) > s_max:
        raise NoRoot(f"characteristic speed {lam} cannot vanish within the strength range")
    for _ in range(20):
        g = system.eigenvalue(rarefaction_curve(system, k, u, s, s_max, check_box=False), k)
        if abs(g) <= tol:
            return float(s)
        s -= g
        if abs(s) > s_max:
            raise NoRoot(f"characteristic speed {lam} cannot vanish within the strength range")
    raise NoRoot("zero characteristic speed not reached")


def right_state_curve(system: ConservationSystem, family: int, u_left, s: float,
                      tol: float = 1e-12) -> np.ndarray:
    """Right-state curve ``m_i``: the state ``w`` with ``t_i(w, -s) = u_left``."""
    u_left = np.asarray(u_left, dtype=float)
    if s == 0.0:
        return u_left.copy()
    if system.linear:
        return u_left + s * system.right_vector(u_left, family)
    guess = u_left + s * system.right_vector(u_left, family)
    w, _, _ = damped_newton(
        lambda x: fan_state(system, family, x, -s, check_box=False) - u_left, guess, tol=tol)
    return w
