"""Interior Riemann solvers.

``solve_riemann`` finds the Lax wave fan between two states by Newton on
the composition of the left-state wave fan curves. ``accurate_fronts``
turns a fan into fronts (rarefactions split into pieces of strength at
most ``r_eps``) and ``simplified_fronts`` implements the solver that keeps
the incoming waves and lumps the remainder into a non-physical front.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numerics import NewtonDivergence, damped_newton
from .fronts import CONTACT, NON_PHYSICAL, RAREFACTION, SHOCK, Front
from .systems import GNL, ConservationSystem
from .wavecurves import (S_MAX, fan_state, hugoniot, rarefaction_curve,
                         right_state_curve)

ZERO_STRENGTH = 1e-13


@dataclass
class WaveFan:
    """Wave decomposition of a Riemann problem.

    ``states[0]`` is the left state, ``states[N]`` the right one, and the
    wave of family ``i`` joins ``states[i-1]`` (left) to ``states[i]``.
    """

    strengths: np.ndarray
    states: list
    residual: float = 0.0

    @property
    def u_minus(self) -> np.ndarray:
        return self.states[0]

    @property
    def u_plus(self) -> np.ndarray:
        return self.states[-1]

    def wave(self, family: int):
        return self.strengths[family - 1], self.states[family - 1], self.states[family]


def compose(system: ConservationSystem, strengths, u_plus, first_family: int = 1,
            check_box: bool = False, s_max: float = S_MAX) -> list:
    """States ``t_i(... t_N(u_plus, s_N) ...)`` for ``i = N, ..., first_family``.

    Returns the chain from the leftmost state to ``u_plus``.
    """
    states = [np.asarray(u_plus, dtype=float)]
    for offset, s in enumerate(reversed(list(strengths))):
        family = system.N - offset
        states.append(fan_state(system, family, states[-1], float(s), s_max=s_max,
                                check_box=check_box))
    states.reverse()
    return states


def solve_riemann(system: ConservationSystem, u_minus, u_plus, tol: float = 1e-12,
                  s_max: float = S_MAX) -> WaveFan:
    """Lax wave fan joining ``u_minus`` to ``u_plus``.

    Strengths are limited to ``s_max``; the default is the small-data bound
    used by the tracker.
    """
    u_minus = np.asarray(u_minus, dtype=float)
    u_plus = np.asarray(u_plus, dtype=float)
    N = system.N
    if np.array_equal(u_minus, u_plus):
        return WaveFan(np.zeros(N), [u_plus.copy() for _ in range(N + 1)])
    guess = system.eigen(u_plus).left @ (u_minus - u_plus)

    def residual(s):
        return compose(system, s, u_plus, s_max=s_max)[0] - u_minus

    try:
        s, res, _ = damped_newton(residual, guess, tol=tol)
    except NewtonDivergence:
        s, res, _ = damped_newton(residual, np.zeros(N), tol=tol)
    states = compose(system, s, u_plus, check_box=True, s_max=s_max)
    states[0] = u_minus.copy()
    return WaveFan(np.asarray(s), states, res)


def wave_kind(system: ConservationSystem, family: int, s: float) -> str:
    if system.field_kinds[family - 1] != GNL:
        return CONTACT
    return SHOCK if s > 0 else RAREFACTION


def wave_fronts(system: ConservationSystem, family: int, s: float, left, right,
                r_eps: float | None, split: bool = True) -> list[Front]:
    """Fronts for one elementary wave, splitting rarefactions when required."""
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    if abs(s) < ZERO_STRENGTH:
        return []
    kind = wave_kind(system, family, s)
    if kind == SHOCK:
        speed = hugoniot(system, family, right, s, check_box=False).speed
        return [Front(family, SHOCK, float(s), left, right, float(speed))]
    if kind == CONTACT:
        return [Front(family, CONTACT, float(s), left, right, system.eigenvalue(right, family))]
    pieces = 1
    if split and r_eps is not None and r_eps > 0:
        pieces = max(1, int(np.ceil(abs(s) / r_eps - 1e-12)))
    ds = s / pieces
    fronts = []
    current = right
    for j in range(pieces):
        nxt = left if j == pieces - 1 else rarefaction_curve(system, family, current, ds,
                                                              check_box=False)
        fronts.append(Front(family, RAREFACTION, float(ds), nxt, current,
                            system.eigenvalue(current, family)))
        current = nxt
    fronts.reverse()
    return fronts


def accurate_fronts(system: ConservationSystem, fan: WaveFan, r_eps: float,
                    exempt_families=()) -> list[Front]:
    """Fronts of a solved fan, ordered left to right.

    Rarefactions of a family listed in ``exempt_families`` (the families of
    incoming rarefactions) are emitted as a single front.
    """
    exempt = set(exempt_families or ())
    fronts: list[Front] = []
    for family in range(1, system.N + 1):
        s, left, right = fan.wave(family)
        fronts.extend(wave_fronts(system, family, float(s), left, right, r_eps,
                                  split=family not in exempt))
    return fronts


def simplified_fronts(system: ConservationSystem, front_a: Front, front_b: Front,
                      lambda_hat: float) -> list[Front]:
    """Outgoing fronts of the simplified solver for ``front_a`` (left) hitting ``front_b``.

    The incoming physical waves are continued with unchanged strengths along
    the right-state curves, starting from the left state, and the mismatch
    with the right state is carried by one non-physical front.
    """
    u_l = front_a.left_state
    u_r = front_b.right_state
    out: list[Front] = []
    physical = [f for f in (front_b, front_a) if f.physical]
    if len(physical) == 2 and front_a.family == front_b.family:
        merged = [(front_a.family, front_a.strength + front_b.strength)]
    else:
        merged = [(f.family, f.strength) for f in physical]
        merged.sort(key=lambda fs: fs[0])
    current = u_l
    for family, s in merged:
        if abs(s) < ZERO_STRENGTH:
            continue
        right = right_state_curve(system, family, current, -s)
        out.extend(wave_fronts(system, family, s, current, right, None, split=False))
        current = right
    gap = float(np.sum(np.abs(u_r - current)))
    if gap > 0.0:
        out.append(Front(system.N + 1, NON_PHYSICAL, gap, current, u_r.copy(), float(lambda_hat)))
    elif out:
        out[-1].right_state = u_r.copy()
    return out
