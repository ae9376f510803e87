"""Conservation systems in normal form and their eigen-structure.

A system is described in the working coordinates ``u`` by

* the conserved quantities ``q(u) = g(v(u))`` and the flux ``F(u) = f(v(u))``,
* the viscous-flux matrix ``D(u)`` so that the viscous system reads
  ``q(u)_t + F(u)_x = (D(u) u_x)_x``,
* a symmetrizer ``E(u)`` of the quasilinear matrix ``Dq^{-1} DF``.

From these the normal form ``E u_t + A u_x = B u_xx + G`` is obtained with
``A = E Dq^{-1} DF`` and ``B = E Dq^{-1} D``. The built-in systems carry
closed-form eigenvalues and normalized eigenvectors; user systems fall back
to a numerical eigen-decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._numerics import complex_step_jacobian

GNL = "genuinely-nonlinear"
LD = "linearly-degenerate"


class NonHyperbolic(ValueError):
    """Eigenvalues are complex or closer than the coalescence threshold."""


class NormalizationFailure(ValueError):
    """The GNL normalization factor vanished."""


class MixedField(ValueError):
    """A field is neither genuinely nonlinear nor linearly degenerate."""


class NoCharacteristicFamily(ValueError):
    """No eigenvalue vanishes at the reference state."""


class CaseBUnsupported(ValueError):
    """The hyperbolic block of the viscous kernel is singular at the reference state."""


class LeftWorkingBox(ValueError):
    """A state left the neighborhood of the reference state."""


@dataclass(frozen=True)
class EigenData:
    """Eigenvalues with biorthonormal right (columns) and left (rows) vectors."""

    lambdas: np.ndarray
    right: np.ndarray
    left: np.ndarray


@dataclass
class HypothesisReport:
    """Outcome of the structural checks on a sampled region."""

    checks: dict = field(default_factory=dict)
    spectral_gap: float = np.nan

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values())

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks[name] = (bool(ok), detail)

    def failures(self) -> list[str]:
        return [f"{k}: {d}" for k, (ok, d) in self.checks.items() if not ok]


class ConservationSystem:
    """Base class for viscous conservation systems.

    Subclasses implement :meth:`conserved`, :meth:`flux`, :meth:`viscosity`
    and :meth:`symmetrizer`. The first two must accept component-first
    arrays (shape ``(N, ...)``) built from complex-safe operations, so that
    Jacobians can be taken by complex-step differentiation.

    Parameters
    ----------
    N : int
        Number of unknowns.
    h : int
        Dimension of the kernel of the viscosity matrix; the first ``h``
        components of ``u`` are the purely hyperbolic ones.
    u_star : array_like
        Reference state, where one characteristic speed vanishes.
    field_kinds : sequence of str
        ``GNL`` or ``LD`` for each family.
    hyp5_case : str
        ``"A"`` (invertible hyperbolic block), ``"C"`` (vanishing hyperbolic
        block) or ``"none"`` when ``h = 0``.
    params : dict
        Named physical parameters, kept for reporting.
    box_halfwidth : float
        Half-width of the working neighborhood, per component scaled by
        ``max(1, |u_star_i|)``.
    """

    name = "generic"
    linear = False

    def __init__(self, N: int, h: int, u_star, field_kinds, hyp5_case: str,
                 params: dict | None = None, box_halfwidth: float = 0.25):
        self.N = int(N)
        self.h = int(h)
        self.u_star = np.asarray(u_star, dtype=float).reshape(self.N)
        self.field_kinds = tuple(field_kinds)
        self.hyp5_case = hyp5_case
        self.params = dict(params or {})
        self.box_halfwidth = float(box_halfwidth)
        self.box_scale = np.maximum(1.0, np.abs(self.u_star))
        self._ld_reference: dict[int, np.ndarray] = {}

    # ------------------------------------------------------------------
    # model definition (override)
    def conserved(self, u):
        raise NotImplementedError

    def flux(self, u):
        raise NotImplementedError

    def viscosity(self, u) -> np.ndarray:
        raise NotImplementedError

    def symmetrizer(self, u) -> np.ndarray:
        raise NotImplementedError

    def to_v(self, u) -> np.ndarray:
        """Change of variables ``v(u)``; defaults to the conserved quantities."""
        return np.asarray(self.conserved(np.asarray(u, dtype=float)), dtype=float)

    def from_v(self, v) -> np.ndarray:
        """Inverse change of variables, by Newton from the reference state."""
        from ._numerics import damped_newton

        v = np.asarray(v, dtype=float)
        u, _, _ = damped_newton(lambda w: self.to_v(w) - v, self.u_star.copy(),
                                tol=1e-13, jac=self.dq)
        return u

    # ------------------------------------------------------------------
    # derived structure
    def dq(self, u) -> np.ndarray:
        return complex_step_jacobian(self.conserved, u)

    def dflux(self, u) -> np.ndarray:
        return complex_step_jacobian(self.flux, u)

    def quasilinear(self, u) -> np.ndarray:
        """The matrix ``E^{-1} A = Dq^{-1} DF``."""
        return np.linalg.solve(self.dq(u), self.dflux(u))

    def normal_form(self, u):
        """Return ``(E, A, B)`` of the normal form at ``u``."""
        E = self.symmetrizer(u)
        S = E @ np.linalg.inv(self.dq(u))
        return E, S @ self.dflux(u), S @ self.viscosity(u)

    def G(self, u, u_x) -> np.ndarray:
        """Lower-order gradient term; the built-in models keep it at zero."""
        return np.zeros((self.N, self.N))

    # ------------------------------------------------------------------
    # eigen-structure
    def eigenvalues(self, u) -> np.ndarray:
        """Sorted characteristic speeds (numerical fallback)."""
        w = np.linalg.eigvals(self.quasilinear(u))
        if np.max(np.abs(w.imag)) > 1e-10:
            raise NonHyperbolic(f"complex characteristic speeds at {u}")
        return np.sort(w.real)

    def eigenvalue(self, u, i: int) -> float:
        return float(self.eigenvalues(u)[i - 1])

    def lambda_gradient(self, u, i: int) -> np.ndarray:
        """Central finite-difference gradient of ``lambda_i``."""
        u = np.asarray(u, dtype=float)
        step = 1e-6 * (1.0 + np.linalg.norm(u))
        grad = np.empty(self.N)
        for j in range(self.N):
            e = np.zeros(self.N)
            e[j] = step
            grad[j] = (self.eigenvalue(u + e, i) - self.eigenvalue(u - e, i)) / (2 * step)
        return grad

    def _raw_right_vectors(self, u) -> np.ndarray:
        w, V = np.linalg.eig(self.quasilinear(u))
        order = np.argsort(w.real)
        return V[:, order].real

    def _ld_orientation(self, i: int) -> np.ndarray:
        ref = self._ld_reference.get(i)
        if ref is None:
            v = self._raw_right_vectors(self.u_star)[:, i - 1]
            v = v / np.linalg.norm(v)
            if v[np.argmax(np.abs(v))] < 0:
                v = -v
            self._ld_reference[i] = ref = v
        return ref

    def right_vectors(self, u) -> np.ndarray:
        """Normalized right eigenvectors as columns.

        GNL families satisfy ``grad(lambda_i) . r_i = 1``; LD families have
        unit norm with orientation pinned at the reference state.
        """
        u = np.asarray(u, dtype=float)
        V = self._raw_right_vectors(u)
        for i in range(1, self.N + 1):
            v = V[:, i - 1]
            if self.field_kinds[i - 1] == GNL:
                scale = float(self.lambda_gradient(u, i) @ v)
                if abs(scale) < 1e-10:
                    raise NormalizationFailure(f"family {i} at {u}")
                V[:, i - 1] = v / scale
            else:
                v = v / np.linalg.norm(v)
                if v @ self._ld_orientation(i) < 0:
                    v = -v
                V[:, i - 1] = v
        return V

    def right_vector(self, u, i: int) -> np.ndarray:
        return self.right_vectors(u)[:, i - 1]

    def eigen(self, u) -> EigenData:
        """Eigenvalues and biorthonormal eigenvectors at ``u``."""
        lam = self.eigenvalues(u)
        if self.N > 1 and np.min(np.diff(lam)) < 1e-8:
            raise NonHyperbolic(f"eigenvalues coalesce at {u}: {lam}")
        R = self.right_vectors(u)
        return EigenData(lam, R, np.linalg.inv(R))

    # ------------------------------------------------------------------
    # working neighborhood
    def in_box(self, u, slack: float = 1.0) -> bool:
        d = np.abs(np.asarray(u, dtype=float) - self.u_star) / self.box_scale
        return bool(np.all(d <= self.box_halfwidth * slack))

    def require_in_box(self, u) -> None:
        if not np.all(np.isfinite(u)) or not self.in_box(u):
            raise LeftWorkingBox(f"state {np.asarray(u)} outside the working box of {self.name}")

    def sample_box(self, n: int, rng: np.random.Generator, fraction: float = 1.0) -> np.ndarray:
        """Uniform random states in (a fraction of) the working box, shape ``(n, N)``."""
        half = fraction * self.box_halfwidth * self.box_scale
        return self.u_star + rng.uniform(-1.0, 1.0, size=(n, self.N)) * half

    def characteristic_family(self) -> int:
        return boundary_char_family(self)

    def max_speed(self, samples: int = 64) -> float:
        """Upper bound of ``|lambda_i|`` over the working box (corners and random points)."""
        rng = np.random.default_rng(0)
        pts = [self.u_star]
        for corner in range(2 ** self.N):
            signs = np.array([1.0 if corner >> j & 1 else -1.0 for j in range(self.N)])
            pts.append(self.u_star + signs * self.box_halfwidth * self.box_scale)
        pts.extend(self.sample_box(samples, rng))
        return max(float(np.max(np.abs(self.eigenvalues(p)))) for p in pts)

    def describe(self) -> dict:
        return {"system": self.name, "N": self.N, "h": self.h,
                "case": self.hyp5_case, "u_star": self.u_star.tolist(),
                "fields": list(self.field_kinds), "params": self.params}


# ----------------------------------------------------------------------
# classification and validation

def classify_field(system: ConservationSystem, family: int, sample_grid) -> tuple[str, float]:
    """Classify a family as GNL or LD on a grid of states.

    Returns the kind together with ``min |grad(lambda) . r|`` computed with
    unit-norm eigenvectors.
    """
    grid = np.atleast_2d(np.asarray(sample_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("empty sample grid")
    values = []
    for u in grid:
        r = system.right_vector(u, family)
        r = r / np.linalg.norm(r)
        values.append(float(system.lambda_gradient(u, family) @ r))
    values = np.array(values)
    d = float(np.min(np.abs(values)))
    if np.all(np.abs(values) <= 1e-10):
        return LD, d
    if d > 1e-10 and (np.all(values > 0) or np.all(values < 0)):
        return GNL, d
    raise MixedField(f"family {family}: |grad lambda . r| ranges over "
                     f"[{d:.3e}, {np.max(np.abs(values)):.3e}] with sign changes")


def boundary_char_family(system: ConservationSystem) -> int:
    """Index ``k`` (1-based) of the family whose speed vanishes at ``u_star``."""
    lam = system.eigenvalues(system.u_star)
    zero = np.flatnonzero(np.abs(lam) <= 1e-10)
    if zero.size != 1:
        raise NoCharacteristicFamily(f"speeds at the reference state: {lam}")
    return int(zero[0]) + 1


def negative_speed_count(system: ConservationSystem) -> int:
    """Number of negative characteristic speeds at the reference state."""
    return int(np.sum(system.eigenvalues(system.u_star) < 0))


def check_hypotheses(system: ConservationSystem, region=None, samples: int = 40,
                     seed: int = 0) -> HypothesisReport:
    """Check the structural hypotheses on sampled states.

    Parameters
    ----------
    region : array_like, optional
        States to test, shape ``(M, N)``; defaults to ``samples`` random
        states of the working box plus the reference state.
    """
    report = HypothesisReport()
    if region is None:
        region = np.vstack([system.u_star,
                            system.sample_box(samples, np.random.default_rng(seed))])
    region = np.atleast_2d(np.asarray(region, dtype=float))
    h, N = system.h, system.N
    tol = 1e-9
    sym_a = sym_e = spd_e = block_e = block_b = spd_b = ks = hyp = case_ok = True
    gap = np.inf
    worst_case = ""
    try:
        k = boundary_char_family(system)
    except NoCharacteristicFamily:
        k = None
    for u in region:
        E, A, B = system.normal_form(u)
        scale = max(1.0, np.max(np.abs(A)))
        sym_a &= np.max(np.abs(A - A.T)) <= tol * scale
        sym_e &= np.max(np.abs(E - E.T)) <= tol * max(1.0, np.max(np.abs(E)))
        spd_e &= np.min(np.linalg.eigvalsh(0.5 * (E + E.T))) > 0
        if h:
            block_e &= np.max(np.abs(E[:h, h:])) <= tol and np.max(np.abs(E[h:, :h])) <= tol
            block_b &= np.max(np.abs(B[:h, :])) <= tol and np.max(np.abs(B[:, :h])) <= tol
        B22 = B[h:, h:]
        spd_b &= np.max(np.abs(B22 - B22.T)) <= tol * max(1.0, np.max(np.abs(B22))) \
            and np.min(np.linalg.eigvalsh(0.5 * (B22 + B22.T))) > 0
        try:
            eig = system.eigen(u)
        except NonHyperbolic:
            hyp = False
            continue
        ks &= min(np.linalg.norm(B @ eig.right[:, i]) / np.linalg.norm(eig.right[:, i])
                  for i in range(N)) > 1e-8
        others = [abs(l) for i, l in enumerate(eig.lambdas, start=1) if i != k]
        if others:
            gap = min(gap, min(others))
        if system.hyp5_case == "A":
            det = abs(np.linalg.det(A[:h, :h]))
            if det <= 1e-10:
                case_ok = False
                worst_case = f"det A11 = {det:.2e} at {u}"
        elif system.hyp5_case == "C":
            if np.max(np.abs(A[:h, :h])) > 1e-10:
                case_ok = False
                worst_case = f"A11 nonzero at {u}"
    report.add("A symmetric", sym_a)
    report.add("E symmetric positive definite", sym_e and spd_e)
    report.add("E block diagonal", block_e)
    report.add("B block form", block_b)
    report.add("B22 symmetric positive definite", spd_b)
    report.add("Kawashima-Shizuta", ks)
    report.add("strict hyperbolicity", hyp)
    report.add("characteristic family", k is not None,
               "" if k is not None else "no vanishing speed at the reference state")
    report.add("spectral gap", gap > 0, f"measured gap {gap:.4g}")
    report.add(f"case {system.hyp5_case}", case_ok, worst_case)
    kinds_ok = True
    detail = ""
    for i in range(1, N + 1):
        try:
            kind, _ = classify_field(system, i, region[: min(len(region), 12)])
        except MixedField as exc:
            kinds_ok, detail = False, str(exc)
            continue
        if kind != system.field_kinds[i - 1]:
            kinds_ok = False
            detail = f"family {i} classified {kind}"
    report.add("field kinds", kinds_ok, detail)
    report.spectral_gap = float(gap)
    return report


# ----------------------------------------------------------------------
# built-in systems

class Burgers(ConservationSystem):
    """Scalar viscous Burgers equation ``u_t + (u^2/2)_x = nu u_xx``."""

    name = "burgers"

    def __init__(self, nu: float = 1.0, u_star: float = 0.0, box_halfwidth: float = 1.0):
        super().__init__(1, 0, [u_star], [GNL], "none", {"nu": nu}, box_halfwidth)
        self.nu = nu

    def conserved(self, u):
        return u

    def flux(self, u):
        return 0.5 * u * u

    def viscosity(self, u):
        return np.array([[self.nu]])

    def symmetrizer(self, u):
        return np.eye(1)

    def eigenvalues(self, u):
        return np.array([float(np.asarray(u).reshape(-1)[0])])

    def eigenvalue(self, u, i):
        return float(np.asarray(u).reshape(-1)[0])

    def right_vectors(self, u):
        return np.ones((1, 1))

    def right_vector(self, u, i):
        return np.ones(1)

    def dq(self, u):
        return np.eye(1)

    def dflux(self, u):
        return np.array([[float(np.asarray(u).reshape(-1)[0])]])


class PSystem(ConservationSystem):
    """Isentropic gas dynamics in Lagrangian coordinates, seen from a moving frame.

    Unknowns ``u = (tau, w)`` (specific volume, velocity), pressure
    ``p = kappa tau^-gamma`` and identity viscosity. In a frame moving with
    speed ``frame_speed`` the flux becomes ``(-w, p) - frame_speed (tau, w)``,
    so that the boundary can be made characteristic for either family.

    Parameters
    ----------
    characteristic_family : {1, 2}
        Family whose speed vanishes at ``u_star``; fixes ``frame_speed``
        unless it is given explicitly.
    """

    name = "p-system"

    def __init__(self, gamma: float = 1.4, kappa: float = 1.0, nu: float = 1.0,
                 tau_star: float = 1.0, w_star: float = 0.0,
                 characteristic_family: int = 1, frame_speed: float | None = None,
                 box_halfwidth: float = 0.25):
        self.gamma, self.kappa, self.nu = gamma, kappa, nu
        c_star = self.sound_speed(tau_star)
        if frame_speed is None:
            frame_speed = -c_star if characteristic_family == 1 else c_star
        self.frame_speed = float(frame_speed)
        super().__init__(2, 0, [tau_star, w_star], [GNL, GNL], "none",
                         {"gamma": gamma, "kappa": kappa, "nu": nu,
                          "frame_speed": self.frame_speed}, box_halfwidth)

    def pressure(self, tau):
        return self.kappa * tau ** (-self.gamma)

    def sound_speed(self, tau):
        """Lagrangian sound speed ``sqrt(-p'(tau))``."""
        return np.sqrt(self.kappa * self.gamma) * tau ** (-(self.gamma + 1) / 2)

    def conserved(self, u):
        return u

    def flux(self, u):
        tau, w = u[0], u[1]
        mu = self.frame_speed
        return np.stack([-w - mu * tau, self.pressure(tau) - mu * w])

    def viscosity(self, u):
        return self.nu * np.eye(2)

    def symmetrizer(self, u):
        c = self.sound_speed(u[0])
        return np.diag([c * c, 1.0])

    def dq(self, u):
        return np.eye(2)

    def dflux(self, u):
        c = self.sound_speed(u[0])
        mu = self.frame_speed
        return np.array([[-mu, -1.0], [-c * c, -mu]])

    def eigenvalues(self, u):
        c = self.sound_speed(u[0])
        return np.array([-self.frame_speed - c, -self.frame_speed + c])

    def eigenvalue(self, u, i):
        c = self.sound_speed(u[0])
        return float(-self.frame_speed + (c if i == 2 else -c))

    def right_vectors(self, u):
        tau = u[0]
        c = self.sound_speed(tau)
        dc = -(self.gamma + 1) / 2 * c / tau
        return np.array([[1.0 / -dc, 1.0 / dc], [c / -dc, -c / dc]])

    def right_vector(self, u, i):
        return self.right_vectors(u)[:, i - 1]

    def to_v(self, u):
        return np.asarray(u, dtype=float).copy()

    def from_v(self, v):
        return np.asarray(v, dtype=float).copy()


class IsentropicEuler(ConservationSystem):
    """Isentropic Euler equations in Eulerian coordinates, ``u = (rho, w)``.

    ``viscosity="physical"`` uses the viscous flux ``(0, nu w_x)`` (one
    purely hyperbolic component, invertible hyperbolic block when ``w`` stays
    away from zero); ``viscosity="identity"`` uses ``nu (q(u))_xx``.
    """

    name = "isentropic-euler"

    def __init__(self, gamma: float = 1.4, kappa: float = 1.0, nu: float = 1.0,
                 rho_star: float = 1.0, w_star: float | None = None,
                 characteristic_family: int = 1, viscosity: str = "physical",
                 box_halfwidth: float = 0.25):
        self.gamma, self.kappa, self.nu = gamma, kappa, nu
        self.viscosity_kind = viscosity
        c_star = self.sound_speed(rho_star)
        if w_star is None:
            w_star = c_star if characteristic_family == 1 else -c_star
        h = 1 if viscosity == "physical" else 0
        case = "A" if h else "none"
        if h and abs(w_star) < 1e-3:
            raise CaseBUnsupported("physical viscosity with vanishing velocity at the reference state")
        super().__init__(2, h, [rho_star, w_star], [GNL, GNL], case,
                         {"gamma": gamma, "kappa": kappa, "nu": nu, "viscosity": viscosity},
                         box_halfwidth)

    def sound_speed(self, rho):
        return np.sqrt(self.kappa * self.gamma) * rho ** ((self.gamma - 1) / 2)

    def conserved(self, u):
        return np.stack([u[0], u[0] * u[1]])

    def flux(self, u):
        rho, w = u[0], u[1]
        return np.stack([rho * w, rho * w * w + self.kappa * rho ** self.gamma])

    def viscosity(self, u):
        if self.viscosity_kind == "physical":
            return np.array([[0.0, 0.0], [0.0, self.nu]])
        return self.nu * self.dq(u)

    def symmetrizer(self, u):
        rho = u[0]
        c = self.sound_speed(rho)
        return np.diag([c * c / rho, rho])

    def dq(self, u):
        rho, w = u[0], u[1]
        return np.array([[1.0, 0.0], [w, rho]])

    def dflux(self, u):
        rho, w = u[0], u[1]
        c = self.sound_speed(rho)
        return np.array([[w, rho], [w * w + c * c, 2 * rho * w]])

    def eigenvalues(self, u):
        c = self.sound_speed(u[0])
        return np.array([u[1] - c, u[1] + c])

    def eigenvalue(self, u, i):
        c = self.sound_speed(u[0])
        return float(u[1] + (c if i == 2 else -c))

    def right_vectors(self, u):
        rho = u[0]
        c = self.sound_speed(rho)
        g1 = self.gamma + 1
        return np.array([[-2 * rho / (g1 * c), 2 * rho / (g1 * c)], [2 / g1, 2 / g1]])

    def right_vector(self, u, i):
        return self.right_vectors(u)[:, i - 1]

    def to_v(self, u):
        return np.array([u[0], u[0] * u[1]], dtype=float)

    def from_v(self, v):
        return np.array([v[0], v[1] / v[0]], dtype=float)


class Euler(ConservationSystem):
    """Full Euler / Navier-Stokes for a polytropic gas, ``u = (rho, w, theta)``.

    Pressure ``p = R rho theta`` and internal energy ``e = e_theta theta``.
    ``viscosity="physical"`` uses the viscous flux
    ``(0, nu w_x, nu w w_x + conductivity theta_x)``; ``"identity"`` uses
    ``nu (q(u))_xx``. The reference velocity is ``+c`` (family 1
    characteristic), ``0`` (family 2) or ``-c`` (family 3).
    """

    name = "euler"

    def __init__(self, R: float = 1.0, e_theta: float = 2.5, nu: float = 1.0,
                 conductivity: float = 1.0, rho_star: float = 1.0, theta_star: float = 1.0,
                 w_star: float | None = None, characteristic_family: int = 1,
                 viscosity: str = "physical", box_halfwidth: float = 0.25):
        self.R, self.e_theta, self.nu, self.conductivity = R, e_theta, nu, conductivity
        self.viscosity_kind = viscosity
        c_star = float(self.sound_speed(theta_star))
        if w_star is None:
            w_star = {1: c_star, 2: 0.0, 3: -c_star}[characteristic_family]
        h = 1 if viscosity == "physical" else 0
        if h and abs(w_star) < 1e-3:
            raise CaseBUnsupported(
                "physical viscosity at vanishing velocity (singular hyperbolic block) is not supported")
        super().__init__(3, h, [rho_star, w_star, theta_star], [GNL, LD, GNL],
                         "A" if h else "none",
                         {"R": R, "e_theta": e_theta, "nu": nu, "conductivity": conductivity,
                          "viscosity": viscosity}, box_halfwidth)

    def sound_speed(self, theta):
        return np.sqrt(self.R * theta * (1.0 + self.R / self.e_theta))

    def conserved(self, u):
        rho, w, th = u[0], u[1], u[2]
        return np.stack([rho, rho * w, rho * (self.e_theta * th + 0.5 * w * w)])

    def flux(self, u):
        rho, w, th = u[0], u[1], u[2]
        p = self.R * rho * th
        energy = rho * (self.e_theta * th + 0.5 * w * w)
        return np.stack([rho * w, rho * w * w + p, w * (energy + p)])

    def viscosity(self, u):
        if self.viscosity_kind == "physical":
            w = u[1]
            return np.array([[0.0, 0.0, 0.0], [0.0, self.nu, 0.0],
                             [0.0, self.nu * w, self.conductivity]])
        return self.nu * self.dq(u)

    def symmetrizer(self, u):
        rho, _, th = u
        return np.diag([self.R * th / rho, rho, rho * self.e_theta / th])

    def dq(self, u):
        rho, w, th = u
        et = self.e_theta
        return np.array([[1.0, 0.0, 0.0], [w, rho, 0.0],
                         [et * th + 0.5 * w * w, rho * w, rho * et]])

    def dflux(self, u):
        rho, w, th = u
        R, et = self.R, self.e_theta
        enth = et * th + 0.5 * w * w + R * th
        return np.array([[w, rho, 0.0],
                         [w * w + R * th, 2 * rho * w, R * rho],
                         [w * enth, rho * enth + rho * w * w, rho * w * (et + R)]])

    def eigenvalues(self, u):
        c = self.sound_speed(u[2])
        return np.array([u[1] - c, u[1], u[1] + c])

    def eigenvalue(self, u, i):
        c = self.sound_speed(u[2])
        return float(u[1] + (i - 2) * c)

    def right_vectors(self, u):
        rho, w, th = u
        c = self.sound_speed(th)
        et, R = self.e_theta, self.R
        norm = c * (et + R / 2)
        r1 = -np.array([rho * et, -et * c, R * th]) / norm
        r3 = np.array([rho * et, et * c, R * th]) / norm
        r2 = np.array([-rho, 0.0, th])
        r2 = r2 / np.linalg.norm(r2)
        if r2 @ self._ld_orientation(2) < 0:
            r2 = -r2
        return np.column_stack([r1, r2, r3])

    def _raw_right_vectors(self, u):
        rho, w, th = u
        c = self.sound_speed(th)
        et, R = self.e_theta, self.R
        return np.column_stack([[rho * et, -et * c, R * th], [-rho, 0.0, th],
                                [rho * et, et * c, R * th]])

    def right_vector(self, u, i):
        return self.right_vectors(u)[:, i - 1]

    def to_v(self, u):
        return np.asarray(self.conserved(np.asarray(u, dtype=float)), dtype=float)

    def from_v(self, v):
        rho = v[0]
        w = v[1] / rho
        th = (v[2] / rho - 0.5 * w * w) / self.e_theta
        return np.array([rho, w, th], dtype=float)


class LinearSystem(ConservationSystem):
    """Constant-coefficient system ``u_t + F u_x = D u_xx`` with ``F`` symmetric.

    All families are linearly degenerate; the characteristic family is the
    one with zero speed.
    """

    name = "linear"
    linear = True

    def __init__(self, F=None, D=None, u_star=None, box_halfwidth: float = 0.5):
        if F is None:
            F = default_linear_flux_matrix()
        if D is None:
            D = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 1.5]])
        self.F = np.asarray(F, dtype=float)
        self.D = np.asarray(D, dtype=float)
        N = self.F.shape[0]
        if not np.allclose(self.F, self.F.T):
            raise ValueError("flux matrix must be symmetric")
        lam, V = np.linalg.eigh(self.F)
        order = np.argsort(lam)
        self._lam = lam[order]
        V = V[:, order]
        for j in range(N):
            if V[np.argmax(np.abs(V[:, j])), j] < 0:
                V[:, j] = -V[:, j]
        self._R = V
        if u_star is None:
            u_star = np.zeros(N)
        super().__init__(N, 0, u_star, [LD] * N, "none",
                         {"F": self.F.tolist(), "D": self.D.tolist()}, box_halfwidth)

    def conserved(self, u):
        return u

    def flux(self, u):
        return np.tensordot(self.F, u, axes=1)

    def viscosity(self, u):
        return self.D.copy()

    def symmetrizer(self, u):
        return np.eye(self.N)

    def dq(self, u):
        return np.eye(self.N)

    def dflux(self, u):
        return self.F.copy()

    def eigenvalues(self, u):
        return self._lam.copy()

    def eigenvalue(self, u, i):
        return float(self._lam[i - 1])

    def lambda_gradient(self, u, i):
        return np.zeros(self.N)

    def right_vectors(self, u):
        return self._R.copy()

    def right_vector(self, u, i):
        return self._R[:, i - 1].copy()

    def to_v(self, u):
        return np.asarray(u, dtype=float).copy()

    def from_v(self, v):
        return np.asarray(v, dtype=float).copy()


def default_linear_flux_matrix() -> np.ndarray:
    """Symmetric 3x3 matrix with speeds (-1, 0, 1) and non-trivial eigenvectors."""
    c, s = np.cos(0.3), np.sin(0.3)
    Q1 = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    c, s = np.cos(0.5), np.sin(0.5)
    Q2 = np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    Q = Q1 @ Q2
    return Q @ np.diag([-1.0, 0.0, 1.0]) @ Q.T


class LagrangianNavierStokes(ConservationSystem):
    """Navier-Stokes in Lagrangian coordinates, ``u = (tau, w, theta)``.

    The middle speed vanishes identically and the hyperbolic block of the
    normal form is zero (case C).
    """

    name = "lagrangian-ns"

    def __init__(self, R: float = 1.0, e_theta: float = 2.5, nu: float = 1.0,
                 conductivity: float = 1.0, tau_star: float = 1.0, theta_star: float = 1.0,
                 box_halfwidth: float = 0.25):
        self.R, self.e_theta, self.nu, self.conductivity = R, e_theta, nu, conductivity
        super().__init__(3, 1, [tau_star, 0.0, theta_star], [GNL, LD, GNL], "C",
                         {"R": R, "e_theta": e_theta, "nu": nu, "conductivity": conductivity},
                         box_halfwidth)

    def conserved(self, u):
        tau, w, th = u[0], u[1], u[2]
        return np.stack([tau, w, self.e_theta * th + 0.5 * w * w])

    def flux(self, u):
        tau, w, th = u[0], u[1], u[2]
        p = self.R * th / tau
        return np.stack([-w, p, p * w])

    def viscosity(self, u):
        tau, w, _ = u
        return np.array([[0.0, 0.0, 0.0], [0.0, self.nu / tau, 0.0],
                         [0.0, self.nu * w / tau, self.conductivity / tau]])

    def symmetrizer(self, u):
        tau, _, th = u
        return np.diag([self.R * th / tau ** 2, 1.0, self.e_theta / th])

    def eigenvalues(self, u):
        tau, _, th = u
        c = np.sqrt(self.R * th * (1.0 + self.R / self.e_theta)) / tau
        return np.array([-c, 0.0, c])

    def eigenvalue(self, u, i):
        return float(self.eigenvalues(u)[i - 1])


SYSTEMS: dict[str, Callable[..., ConservationSystem]] = {
    "burgers": Burgers,
    "p-system": PSystem,
    "isentropic-euler": IsentropicEuler,
    "euler": Euler,
    "linear": LinearSystem,
    "lagrangian-ns": LagrangianNavierStokes,
}


def make_system(name: str, **params) -> ConservationSystem:
    """Build a registered system from its string id and parameters."""
    try:
        factory = SYSTEMS[name]
    except KeyError:
        raise ValueError(f"unknown system {name!r}; known: {sorted(SYSTEMS)}") from None
    return factory(**params)
