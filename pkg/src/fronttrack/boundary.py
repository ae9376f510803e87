"""Boundary layers and boundary Riemann solvers.

The boundary layers are steady solutions of the viscous system on the
half line. Integrating the steady equation once gives the first-order
layer equation ``D(u) u' = F(u) - F(w)`` with asymptotic state ``w``.
For ``h > 0`` its first ``h`` rows are algebraic and are solved for the
hyperbolic components, which leaves an ODE for the remaining ones.

The slow (center) direction of the layer equation is modelled at leading
order by the vector field ``r_c`` and the rate ``theta_c``, and the
resulting curve ``b_k`` is glued to the Lax curve of the boundary
characteristic family into the characteristic wave fan curve ``zeta_k``.
Uniformly stable layers are computed by backward shooting.
"""

from __future__ import annotations

import math

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._numerics import NewtonDivergence, damped_newton, fd_jacobian, rk4_path
from .fronts import NON_PHYSICAL, Front
from .riemann import WaveFan, compose, wave_fronts
from .systems import (GNL, CaseBUnsupported, ConservationSystem,
                      NoCharacteristicFamily, boundary_char_family)
from .wavecurves import (S_MAX, NoRoot, bar_s,
                         fan_state, hugoniot, underline_s)

BRANCHES = ("i", "ii", "iii", "iv", "v", "vi", "ld-wave", "ld-layer", "lax")
TIE_TOL = 1e-12
BRANCH_V_TOL = 1e-10
# RK4 steps per S_MAX along the center curve; 32 keeps the error below 1e-10
CENTER_STEPS_PER_SMAX = 32


class ShootingFailure(RuntimeError):
    """Backward shooting onto a layer manifold did not converge."""


class GlueMismatch(RuntimeError):
    """The center curve misses the zero-speed shock by more than the tolerance."""


class BranchAmbiguous(RuntimeError):
    """The boundary Riemann solution cannot be assigned to a single branch."""


# ----------------------------------------------------------------------
# boundary condition

def _positive_block_basis(system: ConservationSystem) -> np.ndarray:
    h = system.h
    if h == 0:
        return np.zeros((0, 0))
    A11 = system.normal_form(system.u_star)[1][:h, :h]
    w, V = np.linalg.eigh(0.5 * (A11 + A11.T))
    return V[:, w > 0]


def beta(system: ConservationSystem, u, u_b, basis: np.ndarray | None = None) -> np.ndarray:
    """Boundary condition residual, zero when ``u`` is compatible with the datum ``u_b``.

    ``h = 0``: the full difference ``u - u_b``. Case A: the projection of the
    hyperbolic part on the positive eigenspace of the hyperbolic block at
    the reference state, followed by the parabolic part. Case C: the
    parabolic part only.
    """
    u = np.asarray(u, dtype=float)
    u_b = np.asarray(u_b, dtype=float)
    h = system.h
    if h == 0:
        return u - u_b
    if system.hyp5_case == "A":
        P = _positive_block_basis(system) if basis is None else basis
        return np.concatenate([P.T @ (u[:h] - u_b[:h]), u[h:] - u_b[h:]])
    if system.hyp5_case == "C":
        return u[h:] - u_b[h:]
    raise CaseBUnsupported(f"boundary condition for case {system.hyp5_case!r}")


# ----------------------------------------------------------------------
# layer model

class BoundaryLayerModel:
    """Linearized and leading-order nonlinear structure of the layer equation.

    Attributes
    ----------
    k : int
        Boundary characteristic family, or for a non-characteristic boundary
        the first family with positive speed.
    characteristic : bool
        Whether a speed vanishes at the reference state.
    ell : int
        Number of boundary conditions absorbed by the hyperbolic block.
    stable_count : int
        Dimension of the uniformly stable layer manifold, ``k - 1 - ell``.
    """

    def __init__(self, system: ConservationSystem):
        self.system = system
        N, h = system.N, system.h
        if h > 0 and system.hyp5_case not in ("A", "C"):
            raise CaseBUnsupported(f"{system.name}: case {system.hyp5_case!r}")
        try:
            self.k = boundary_char_family(system)
            self.characteristic = True
        except NoCharacteristicFamily:
            lam = system.eigenvalues(system.u_star)
            self.k = int(np.sum(lam < 0)) + 1
            self.characteristic = False
        if self.k > N:
            raise ValueError("no family enters the domain: every speed is negative")
        self.kind = system.field_kinds[self.k - 1]
        if h == 0:
            self.ell = 0
        elif system.hyp5_case == "A":
            A11 = system.normal_form(system.u_star)[1][:h, :h]
            self.ell = int(np.sum(np.linalg.eigvalsh(0.5 * (A11 + A11.T)) < 0))
        else:
            self.ell = h
        self.basis = _positive_block_basis(system)
        self.stable_count = self.k - 1 - self.ell
        if self.stable_count < 0:
            raise ValueError("more absorbed conditions than incoming families")
        if h > 0 and system.hyp5_case == "A":
            D = system.viscosity(system.u_star)
            if np.max(np.abs(D[:, :h])) > 0:
                raise NotImplementedError("layer reduction assumes D acts on parabolic components only")
        self.unknowns = self.stable_count + N - self.k + 1

    # -- linearization ------------------------------------------------
    def spectrum(self, w) -> tuple[np.ndarray, np.ndarray]:
        """Finite eigenvalues (ascending) and eigenvectors of ``DF r = mu D r`` at ``w``."""
        system = self.system
        w = np.asarray(w, dtype=float)
        J, D = system.dflux(w), system.viscosity(w)
        h = system.h
        if h == 0:
            mu, V = np.linalg.eig(np.linalg.solve(D, J))
        elif not np.any(D[:h]):
            # the first h rows force r_1 = -J11^-1 J12 r_2; what remains is a
            # regular pencil for the Schur complement on the parabolic block
            coupling = np.linalg.solve(J[:h, :h], J[:h, h:])
            schur = J[h:, h:] - J[h:, :h] @ coupling
            mu, V2 = np.linalg.eig(np.linalg.solve(D[h:, h:], schur))
            V = np.vstack([-coupling @ V2, V2])
        else:
            mu, V = scipy.linalg.eig(J, D)
            finite = np.isfinite(mu) & (np.abs(mu) < 1e8)
            mu, V = mu[finite], V[:, finite]
        if np.max(np.abs(mu.imag), initial=0.0) > 1e-9:
            raise ShootingFailure(f"complex layer spectrum at {w}: {mu}")
        order = np.argsort(mu.real)
        return mu.real[order], V[:, order].real

    def _center_index(self, mu) -> int:
        return int(np.argmin(np.abs(mu)))

    def center(self, u) -> tuple[np.ndarray, float]:
        """Leading-order slow direction ``r_c`` (with ``l_k . r_c = 1``) and rate ``theta_c``."""
        system = self.system
        u = np.asarray(u, dtype=float)
        if system.linear and hasattr(self, "_linear_center"):
            return self._linear_center
        mu, V = self.spectrum(u)
        j = self._center_index(mu)
        r = V[:, j]
        l_k = system.eigen(u).left[self.k - 1]
        scale = float(l_k @ r)
        if abs(scale) < 1e-10:
            raise ShootingFailure(f"slow direction transversal to family {self.k} at {u}")
        out = (r / scale, float(mu[j]))
        if system.linear:
            self._linear_center = out
        return out

    def a_factor(self, u) -> float:
        """Positive factor with ``theta_c(u) a(u) = lambda_k(u)``."""
        u = np.asarray(u, dtype=float)
        E, _, B = self.system.normal_form(u)
        r_k = self.system.right_vector(u, self.k)
        r_c, _ = self.center(u)
        return float((r_k @ B @ r_c) / (r_k @ E @ r_c))

    def stable_basis(self, w) -> tuple[np.ndarray, np.ndarray]:
        """Rates and vectors of the uniformly stable layers at ``w``.

        Vectors are ordered by rate and scaled so that the left eigenvector
        of the matching family gives 1.
        """
        m = self.stable_count
        if m == 0:
            return np.zeros(0), np.zeros((self.system.N, 0))
        mu, V = self.spectrum(w)
        idx = [j for j in range(mu.size) if mu[j] < 0]
        if self.characteristic:
            c = self._center_index(mu)
            idx = [j for j in idx if j != c]
        if len(idx) != m:
            raise ShootingFailure(f"expected {m} stable layer rates at {w}, found {mu}")
        L = self.system.eigen(w).left
        vecs = []
        for n, j in enumerate(idx):
            v = V[:, j]
            scale = float(L[self.ell + n] @ v)
            vecs.append(v / scale if abs(scale) > 1e-8 else v / np.linalg.norm(v))
        return mu[idx], np.column_stack(vecs)

    # -- nonlinear layer equation ------------------------------------
    def lift(self, z, w, guess=None) -> np.ndarray:
        """Full state with parabolic part ``z`` on the algebraic constraint of ``w``."""
        system = self.system
        h = system.h
        z = np.asarray(z, dtype=float)
        if h == 0:
            return z.copy()
        w = np.asarray(w, dtype=float)
        F1 = system.flux(w)[:h]
        u1 = (w[:h] if guess is None else guess[:h]).copy()
        for _ in range(30):
            u = np.concatenate([u1, z])
            g = system.flux(u)[:h] - F1
            if np.max(np.abs(g)) <= 1e-14 * (1 + np.max(np.abs(F1))):
                return u
            u1 = u1 - np.linalg.solve(system.dflux(u)[:h, :h], g)
        return np.concatenate([u1, z])

    def layer_field(self, w):
        """Right-hand side ``z' = G(z)`` of the reduced layer equation with end state ``w``."""
        system = self.system
        h = system.h
        w = np.asarray(w, dtype=float)
        Fw = system.flux(w)

        def rhs(z):
            u = self.lift(z, w)
            D = system.viscosity(u)
            return np.linalg.solve(D[h:, h:], (system.flux(u) - Fw)[h:])

        return rhs

    def stable_point(self, w, xi, exact: bool = True) -> np.ndarray:
        """Boundary value of the uniformly stable layer with end state ``w`` and coordinates ``xi``.

        The coordinates are the components along the stable eigenvectors in
        the eigenbasis of the linearization. With ``exact`` the point is
        moved onto the nonlinear stable manifold by backward shooting.
        """
        system = self.system
        w = np.asarray(w, dtype=float)
        xi = np.asarray(xi, dtype=float).reshape(-1)
        if self.stable_count == 0 or not np.any(xi):
            return w.copy()
        if system.hyp5_case == "C" and system.h > 0:
            raise ShootingFailure("stable layers in case C are not supported")
        h = system.h
        rates, V = self.stable_basis(w)
        linear_point = self.lift(w[h:] + V[h:] @ xi, w)
        if not exact or system.linear or np.max(np.abs(xi)) < 1e-9:
            return linear_point
        return self._shoot(w, xi, rates, V)

    def _shoot(self, w, xi, rates, V) -> np.ndarray:
        system = self.system
        h = system.h
        mu_all, V_all = self.spectrum(w)
        basis = V_all[h:, :].copy()
        stable_cols = [int(np.argmin(np.abs(mu_all - r))) for r in rates]
        basis[:, stable_cols] = V[h:]
        coords = np.linalg.inv(basis)[stable_cols]
        horizon = 8.0 / float(np.min(np.abs(rates)))
        step = 0.25 / float(np.max(np.abs(mu_all)))
        rhs = self.layer_field(w)
        wz = w[h:]
        growth = np.exp(rates * horizon)

        def endpoint(eta):
            start = wz + V[h:] @ (eta * growth)
            return rk4_path(lambda z: -rhs(z), start, horizon, step)

        # warm start: reuse the last nonlinear offset of the coordinates
        offset = getattr(self, "_shoot_offset", None)
        eta = xi + offset if offset is not None and offset.shape == xi.shape else xi.copy()
        res_prev = np.inf
        for _ in range(40):
            z0 = endpoint(eta)
            res = coords @ (z0 - wz) - xi
            r = float(np.max(np.abs(res)))
            if r <= 1e-12:
                self._shoot_offset = eta - xi
                return self.lift(z0, w)
            if r > 0.5 * res_prev:
                break
            res_prev = r
            eta = eta - res
        try:
            eta, _, _ = damped_newton(lambda e: coords @ (endpoint(e) - wz) - xi, eta, tol=1e-12)
        except NewtonDivergence as exc:
            raise ShootingFailure(f"stable layer with coordinates {xi} at {w}: {exc}") from None
        self._shoot_offset = eta - xi
        return self.lift(endpoint(eta), w)


# ----------------------------------------------------------------------
# center curve and characteristic wave fan curve

def center_curve_b_k(system: ConservationSystem, model: BoundaryLayerModel, u, s: float,
                     check_box: bool = False) -> tuple[np.ndarray, float]:
    """Leading-order center curve: ``du/dtau = r_c(u)``, ``dz/dtau = theta_c(u)`` up to ``tau = s``.

    The parameter is measured by the fixed covector ``l_k(u)`` of the base
    point, ``l_k . (u(tau) - u) = tau``, the same convention as the Hugoniot
    locus, so the two curves meet to third order at the zero-speed shock.
    """
    u = np.asarray(u, dtype=float)
    if s == 0.0:
        return u.copy(), 0.0
    if system.linear:
        r_c, theta = model.center(u)
        return u + s * r_c, theta * s
    N = system.N
    l_k = system.eigen(u).left[model.k - 1]

    def rhs(y):
        r_c, theta = model.center(y[:N])
        d = float(l_k @ r_c)
        return np.append(r_c / d, theta / d)

    y = rk4_path(rhs, np.append(u, 0.0), s, S_MAX / CENTER_STEPS_PER_SMAX)
    if check_box:
        system.require_in_box(y[:N])
    return y[:N], float(y[N])


def gluing_mismatch(system: ConservationSystem, model: BoundaryLayerModel, u) -> float:
    """``|t_k(u, s) - b_k(u, s)|`` at the zero-speed shock strength, before correction."""
    s = underline_s(system, u, model.k)
    state, z = center_curve_b_k(system, model, u, s)
    shock = hugoniot(system, model.k, u, s, check_box=False).state
    return float(np.max(np.abs(np.append(shock - state, z))))


def center_rate_root(system: ConservationSystem, model: BoundaryLayerModel, u) -> float:
    """Positive root of ``s -> z_c(s)`` along the center curve, for ``lambda_k(u) < 0``."""
    from scipy.optimize import brentq

    s_guess = underline_s(system, u, model.k)
    f = lambda s: center_curve_b_k(system, model, u, s)[1]
    lo, hi = 0.5 * s_guess, 1.5 * s_guess
    return float(brentq(f, lo, hi, xtol=1e-14))


@dataclass
class ZetaEval:
    """A point of the characteristic wave fan curve and the branch producing it."""

    state: np.ndarray
    branch: str
    z_c: float = 0.0


def zeta_k(system: ConservationSystem, model: BoundaryLayerModel, u, s: float,
           glue: bool = True) -> ZetaEval:
    """Characteristic wave fan curve through ``u``.

    Lax waves of non-negative speed are followed by boundary layers on the
    center curve. The leading-order center curve is corrected by
    ``(s / s_under)^2`` times its gluing defect on ``[0, s_under]`` so that
    it meets the zero-speed shock exactly (``glue=False`` disables it).
    """
    u = np.asarray(u, dtype=float)
    k = model.k
    if s == 0.0:
        return ZetaEval(u.copy(), "lax")
    if not model.characteristic:
        return ZetaEval(fan_state(system, k, u, s, check_box=False), "lax")
    lam = system.eigenvalue(u, k)
    if model.kind != GNL:
        if lam >= -TIE_TOL:
            return ZetaEval(fan_state(system, k, u, s, check_box=False), "lax")
        state, z = center_curve_b_k(system, model, u, s)
        return ZetaEval(state, "layer", z)
    if lam >= -TIE_TOL:
        sb = bar_s(system, u, k) if lam > 0 else 0.0
        if s >= sb:
            return ZetaEval(fan_state(system, k, u, s, check_box=False), "lax")
        sonic = fan_state(system, k, u, sb, check_box=False)
        state, z = center_curve_b_k(system, model, sonic, s - sb)
        return ZetaEval(state, "layer", z)
    su = underline_s(system, u, k)
    if s > su:
        return ZetaEval(fan_state(system, k, u, s, check_box=False), "lax")
    state, z = center_curve_b_k(system, model, u, s)
    if glue and s > 0:
        end, z_end = center_curve_b_k(system, model, u, su)
        shock = hugoniot(system, k, u, su, check_box=False).state
        w = (s / su) ** 2
        state = state + w * (shock - end)
        z = z - w * z_end
    return ZetaEval(state, "layer", z)


def phi(system: ConservationSystem, model: BoundaryLayerModel, u, xi, s_k: float,
        exact: bool = True) -> np.ndarray:
    """Boundary value of the composite layer: stable layer on top of ``zeta_k(u, s_k)``."""
    base = zeta_k(system, model, u, s_k).state
    return model.stable_point(base, xi, exact=exact)


# ----------------------------------------------------------------------
# boundary Riemann problem

@dataclass
class BoundaryTraceState:
    """Trace of the solution at the boundary and the layer coordinates behind it."""

    ubar: np.ndarray
    xi: np.ndarray
    xi_k: float
    u_b: np.ndarray
    branch: str = "lax"

    def copy(self) -> "BoundaryTraceState":
        return BoundaryTraceState(self.ubar.copy(), self.xi.copy(), self.xi_k,
                                  self.u_b.copy(), self.branch)

    def as_dict(self) -> dict:
        return {"ubar": self.ubar.tolist(), "xi": self.xi.tolist(), "xi_k": self.xi_k,
                "u_b": self.u_b.tolist(), "branch": self.branch}


@dataclass
class BoundarySolution:
    """Solution of a boundary Riemann problem.

    ``fan`` holds the waves of families ``k+1..N`` between ``u_hat`` and
    ``u_plus``; ``k_strength`` is the strength of the emitted ``k``-wave
    (zero when none enters the domain) and ``k_left`` its left state.
    """

    trace: BoundaryTraceState
    u_plus: np.ndarray
    u_hat: np.ndarray
    s_k: float
    k_strength: float
    k_left: np.ndarray
    fan: WaveFan
    branch: str
    residual: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def strengths(self) -> np.ndarray:
        return np.concatenate([self.trace.xi, [self.s_k], self.fan.strengths])


def _upper_states(system, model, s_upper, u_plus, check_box=False):
    """Chain ``u_hat, ..., u_plus`` for the families above ``k``."""
    N, k = system.N, model.k
    states = [np.asarray(u_plus, dtype=float)]
    for offset, s in enumerate(reversed(list(s_upper))):
        states.append(fan_state(system, N - offset, states[-1], float(s), check_box=check_box))
    states.reverse()
    return states


def boundary_forward_map(system: ConservationSystem, model: BoundaryLayerModel, params,
                         u_plus, exact: bool = True) -> np.ndarray:
    """Boundary value reached from ``u_plus`` with parameters ``(xi, s_k, ..., s_N)``."""
    params = np.asarray(params, dtype=float)
    m = model.stable_count
    xi, s_k, upper = params[:m], float(params[m]), params[m + 1:]
    u_hat = _upper_states(system, model, upper, u_plus)[0]
    return phi(system, model, u_hat, xi, s_k, exact=exact)


def classify_branch(system: ConservationSystem, model: BoundaryLayerModel, u_hat,
                    s_k: float) -> tuple[str, float]:
    """Branch of the boundary Riemann solution and the threshold strength it uses."""
    k = model.k
    if not model.characteristic:
        return "lax", 0.0
    lam = system.eigenvalue(u_hat, k)
    if model.kind != GNL:
        return ("ld-wave", 0.0) if lam > TIE_TOL else ("ld-layer", 0.0)
    if lam >= -TIE_TOL:
        sb = bar_s(system, u_hat, k) if lam > 0 else 0.0
        if s_k > 0:
            return "i", sb
        return ("ii", sb) if s_k >= sb else ("iii", sb)
    try:
        su = underline_s(system, u_hat, k)
    except NoRoot:
        # no zero-speed shock within reach: every admissible strength lies below it
        return "vi", math.inf
    if abs(s_k - su) <= BRANCH_V_TOL:
        return "v", su
    return ("iv", su) if s_k > su else ("vi", su)


def solve_boundary_riemann(system: ConservationSystem, model: BoundaryLayerModel, u_plus,
                           u_b, guess=None, tol: float = 1e-10) -> BoundarySolution:
    """Solve the boundary Riemann problem with right state ``u_plus`` and datum ``u_b``."""
    u_plus = np.asarray(u_plus, dtype=float)
    u_b = np.asarray(u_b, dtype=float)
    m, k, N = model.stable_count, model.k, system.N
    n = model.unknowns

    def residual(x, exact=True):
        return beta(system, boundary_forward_map(system, model, x, u_plus, exact=exact),
                    u_b, model.basis)

    def jacobian(x):
        return fd_jacobian(lambda y: residual(y, exact=False), x)

    x0 = np.zeros(n) if guess is None else np.asarray(guess, dtype=float)
    jac = jacobian if m > 0 and not system.linear else None
    try:
        x, res, _ = damped_newton(residual, x0, tol=tol, jac=jac)
    except NewtonDivergence:
        if guess is None:
            raise
        x, res, _ = damped_newton(residual, np.zeros(n), tol=tol, jac=jac)
    xi, s_k, upper = x[:m], float(x[m]), x[m + 1:]
    states = _upper_states(system, model, upper, u_plus, check_box=True)
    u_hat = states[0]
    fan = WaveFan(np.asarray(upper, dtype=float), states, res)
    branch, threshold = classify_branch(system, model, u_hat, s_k)
    if branch in ("i", "ii", "iv", "ld-wave", "lax"):
        k_strength, xi_k = s_k, 0.0
    elif branch == "iii":
        k_strength, xi_k = threshold, s_k - threshold
    else:
        k_strength, xi_k = 0.0, s_k
    if k_strength != 0.0:
        k_left = fan_state(system, k, u_hat, k_strength, check_box=True)
    else:
        k_left = u_hat.copy()
    trace = BoundaryTraceState(k_left.copy(), np.asarray(xi, dtype=float).copy(), float(xi_k),
                               u_b.copy(), branch)
    return BoundarySolution(trace, u_plus, u_hat, s_k, float(k_strength), k_left, fan,
                            branch, float(res), {"threshold": float(threshold)})


def underline_state(system: ConservationSystem, model: BoundaryLayerModel,
                    trace: BoundaryTraceState) -> np.ndarray:
    """State behind the boundary layer: the far side of a zero-speed wave sitting at the boundary.

    For a genuinely nonlinear family this is ``t_k(ubar, s_under)`` when
    ``xi_k`` equals the zero-speed shock strength; for a linearly degenerate
    family with vanishing speed it is ``t_k(ubar, xi_k)``. Otherwise it is
    the trace itself.
    """
    ubar = trace.ubar
    if not model.characteristic or trace.xi_k == 0.0:
        return ubar.copy()
    k = model.k
    lam = system.eigenvalue(ubar, k)
    if model.kind == GNL:
        if lam < -TIE_TOL:
            su = underline_s(system, ubar, k)
            if abs(trace.xi_k - su) <= BRANCH_V_TOL:
                return hugoniot(system, k, ubar, su, check_box=False).state
        return ubar.copy()
    if abs(lam) <= TIE_TOL:
        return fan_state(system, k, ubar, trace.xi_k, check_box=False)
    return ubar.copy()


def trace_residual(system: ConservationSystem, model: BoundaryLayerModel,
                   trace: BoundaryTraceState, exact: bool = True) -> float:
    """Max-norm of ``beta(phi(ubar, xi, xi_k), u_b)``."""
    u0 = phi(system, model, trace.ubar, trace.xi, trace.xi_k, exact=exact)
    return float(np.max(np.abs(beta(system, u0, trace.u_b, model.basis))))


def trace_property_holds(system: ConservationSystem, model: BoundaryLayerModel,
                         trace: BoundaryTraceState, tol: float = 1e-9) -> bool:
    """Compatibility between the trace speed and the center coordinate."""
    if not model.characteristic:
        return True
    lam = system.eigenvalue(trace.ubar, model.k)
    if lam > TIE_TOL:
        return abs(trace.xi_k) <= tol
    if model.kind != GNL:
        return True
    su = underline_s(system, trace.ubar, model.k) if lam < -TIE_TOL else 0.0
    return trace.xi_k <= su + tol


# ----------------------------------------------------------------------
# front emission

def accurate_boundary_fronts(system: ConservationSystem, solution: BoundarySolution,
                             r_eps: float, hitting_family: int | None = None,
                             k: int | None = None) -> list[Front]:
    """Fronts entering the domain, ordered left to right.

    A ``k``-rarefaction produced when a ``k``-front hits the boundary is not
    split.
    """
    k = k if k is not None else system.N - solution.fan.strengths.size
    fronts = wave_fronts(system, k, solution.k_strength, solution.k_left, solution.u_hat,
                         r_eps, split=hitting_family != k)
    for offset in range(solution.fan.strengths.size):
        family = k + 1 + offset
        s, left, right = solution.fan.wave(offset + 1)
        fronts.extend(wave_fronts(system, family, float(s), left, right, r_eps))
    return fronts


def simplified_boundary_fronts(system: ConservationSystem, model: BoundaryLayerModel,
                               hitting_front: Front, trace: BoundaryTraceState,
                               lambda_hat: float, r_eps: float | None = None,
                               solution: BoundarySolution | None = None
                               ) -> tuple[list[Front], BoundaryTraceState, BoundarySolution | None]:
    """Simplified boundary solver.

    A front of a family below ``k`` is replaced by one non-physical front
    and the trace is kept. For a ``k``-front the boundary problem is solved
    with the right state moved to ``u_hat``: only the ``k``-wave is emitted,
    followed by a non-physical front from ``u_hat`` to the right state.
    """
    if hitting_front.family < model.k or not hitting_front.physical:
        np_front = Front(system.N + 1, NON_PHYSICAL, hitting_front.amplitude(),
                         hitting_front.left_state.copy(), hitting_front.right_state.copy(),
                         float(lambda_hat))
        return [np_front], trace.copy(), None
    if solution is None:
        solution = solve_boundary_riemann(system, model, hitting_front.right_state, trace.u_b,
                                          guess=None)
    fronts = wave_fronts(system, model.k, solution.k_strength, solution.k_left,
                         solution.u_hat, r_eps, split=False)
    gap = float(np.sum(np.abs(solution.u_plus - solution.u_hat)))
    if gap > 0.0:
        fronts.append(Front(system.N + 1, NON_PHYSICAL, gap, solution.u_hat.copy(),
                            solution.u_plus.copy(), float(lambda_hat)))
    return fronts, solution.trace.copy(), solution


def linear_boundary_solution(system: ConservationSystem, model: BoundaryLayerModel,
                             u_plus, u_b) -> np.ndarray:
    """Closed-form parameters ``(xi, s_k, ..., s_N)`` for a constant-coefficient system with ``h = 0``.

    The boundary value is ``u_plus + sum_{i >= k} s_i r_i + sum xi_j v_j``
    with ``v_j`` the stable eigenvectors of ``D^{-1} F``, so the parameters
    solve one linear system.
    """
    if not system.linear or system.h != 0:
        raise ValueError("closed form needs a linear system with invertible viscosity")
    u_plus = np.asarray(u_plus, dtype=float)
    _, V = model.stable_basis(u_plus)
    R = system.right_vectors(u_plus)
    # t_i(u, s) = u + s r_i, so the boundary value is u_plus + sum s_i r_i
    M = np.column_stack([V, R[:, model.k - 1:]])
    return np.linalg.solve(M, np.asarray(u_b, dtype=float) - u_plus)
