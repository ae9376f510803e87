"""Independent oracles and measurements used by the acceptance harness.

* ``exact_scalar`` evaluates the entropy solution of the Burgers initial
  boundary value problem with piecewise-constant data through the
  Hopf-Lax value function, with the boundary acting as a source of
  characteristics that carries the flux of the positive part of the datum.
* ``l1_distance`` integrates the distance between two profiles.
* ``measure_estimate`` samples incoming configurations of a boundary or
  interior interaction, solves the outgoing problem and reports the ratio
  of the two sides of an interaction estimate.
* ``verify_boundary_condition`` checks at sampled times that a boundary
  layer joins the trace of the approximate solution to the boundary datum,
  using an independent shooting integrator.
* ``convergence_study`` runs one scenario along a sequence of ``eps``.

Sweeps fan out over ``FRONTTRACK_THREADS`` worker processes; results are
merged by sample index, so they do not depend on the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import least_squares

from .boundary import TIE_TOL, BoundaryLayerModel, beta, phi, solve_boundary_riemann, zeta_k
from .riemann import solve_riemann
from .systems import GNL, ConservationSystem
from .wavecurves import bar_s, fan_state, hugoniot, underline_s, varsigma

ESTIMATES = ("nc", "me", "melindeg", "rarepiccola", "pallido2", "pallido", "jd1", "iebressan")
RESOLUTION_FLOOR = 1e-9     # right-hand sides below this are under the solver tolerance
SHOCK_MATCH_TOL = 1e-8      # |xi_k - s_under| below which the trace sits on a zero-speed shock
DEFAULT_SWEEP = {"samples": 1000, "s_min": 1e-3, "s_max": 0.1, "trace_size": 0.05,
                 "spread": 0.05, "seed": 0}


def worker_count() -> int:
    """Number of worker processes requested through ``FRONTTRACK_THREADS``."""
    try:
        return max(1, int(os.environ.get("FRONTTRACK_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items: list) -> list:
    """``map`` over worker processes, results in input order."""
    workers = worker_count()
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


# ----------------------------------------------------------------------
# exact scalar solution

def _step_arrays(data) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(data, "breaks") and hasattr(data, "values"):
        breaks, values = data.breaks, data.values
    else:
        breaks, values = data
    breaks = np.asarray(breaks, dtype=float).reshape(-1)
    values = np.asarray(values, dtype=float).reshape(breaks.size + 1, -1)[:, 0]
    return breaks, values


def _initial_candidates(yb, yv, t, xs) -> tuple[np.ndarray, np.ndarray]:
    """Hopf-Lax values from the initial line and the slopes realizing them."""
    best = np.full(np.shape(xs), np.inf)
    slope = np.zeros(np.shape(xs))
    edges = np.concatenate([[0.0], yb, [np.inf]])
    w_left = 0.0
    for i, c in enumerate(yv):
        a, b = edges[i], edges[i + 1]
        y = np.clip(xs - c * t, a, b)
        val = w_left + c * (y - a) + (xs - y) ** 2 / (2.0 * t)
        take = val < best
        best = np.where(take, val, best)
        slope = np.where(take, (xs - y) / t, slope)
        if np.isfinite(b):
            w_left += c * (b - a)
    return best, slope


def exact_scalar(u0, ub, t: float, x, grid: int = 200_000) -> np.ndarray:
    """Entropy solution of Burgers' equation on ``x > 0`` at time ``t``.

    With ``w(t, x) = int_0^x u dy - int_0^t f(u(s, 0+)) ds`` the solution is
    ``u = w_x``, and ``w`` is the value of a control problem over paths that
    stay in ``x >= 0``: straight segments cost ``|dx/dt|^2 / 2`` and time
    spent on the boundary earns the flux ``f(max(u_b, 0))``. The boundary
    potential ``B(tau) = w(tau, 0+)`` is the running minimum of the
    initial-line value at ``x = 0`` minus the injected flux, which encodes
    the vanishing-viscosity boundary condition. Everything is in closed
    form except that running minimum, taken on ``grid`` points of
    ``[0, t]``.

    Parameters
    ----------
    u0, ub : step functions
        ``(breaks, values)`` pairs or objects with those attributes;
        ``u0`` breaks are positions and ``ub`` breaks are times.
    t : float
        Time.
    x : array_like
        Positive positions.

    Returns
    -------
    ndarray
        Solution values, shape of ``x``.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    yb, yv = _step_arrays(u0)
    if t <= 0:
        out = yv[np.searchsorted(yb, xs, side="right")]
        return out.reshape(np.shape(x)) if np.ndim(x) else out[0]
    tb, tv = _step_arrays(ub)
    best, slope = _initial_candidates(yb, yv, t, xs)

    # injected potential g(tau) = -int_0^tau f(max(u_b, 0))
    flux = 0.5 * np.maximum(tv, 0.0) ** 2
    edges = np.concatenate([[0.0], tb[tb < t], [t]])
    flux = flux[:edges.size - 1]
    g_edges = np.concatenate([[0.0], -np.cumsum(flux * np.diff(edges))])

    def g(tau):
        i = np.clip(np.searchsorted(edges, tau, side="right") - 1, 0, flux.size - 1)
        return g_edges[i] - flux[i] * (tau - edges[i])

    taus = np.linspace(0.0, t, grid + 1)
    a_vals = np.zeros_like(taus)
    a_vals[1:] = _initial_candidates(yb, yv, taus[1:], np.zeros(grid))[0]
    running = np.minimum.accumulate(a_vals - g(taus))

    # a path leaves the boundary at tau and reaches x with slope x / (t - tau);
    # inside a datum piece the best departure time is t - x / u_b
    for i in range(flux.size):
        ta, te = edges[i], edges[i + 1]
        c = math.sqrt(2.0 * flux[i])
        tau = np.clip(t - xs / c, ta, te) if c > 0 else np.full(xs.shape, ta)
        tau = np.minimum(tau, np.nextafter(t, 0.0))
        lag = t - tau
        val = g(tau) + np.interp(tau, taus, running) + xs ** 2 / (2.0 * lag)
        take = val < best
        best = np.where(take, val, best)
        slope = np.where(take, xs / lag, slope)
    return slope.reshape(np.shape(x)) if np.ndim(x) else slope[0]


def godunov_burgers(u0, ub, t: float, x_max: float, cells: int = 4000) -> tuple[np.ndarray, np.ndarray]:
    """First-order Godunov scheme for Burgers on ``[0, x_max]`` (cross-check only).

    Returns cell centres and cell averages. The boundary flux is the
    Godunov flux between the datum and the first cell.
    """
    yb, yv = _step_arrays(u0)
    tb, tv = _step_arrays(ub)
    dx = x_max / cells
    xc = (np.arange(cells) + 0.5) * dx
    u = yv[np.searchsorted(yb, xc, side="right")].astype(float)

    def flux(a, b):
        return np.maximum(0.5 * np.maximum(a, 0.0) ** 2, 0.5 * np.minimum(b, 0.0) ** 2)

    time = 0.0
    while time < t:
        speed = max(float(np.max(np.abs(u))), float(np.max(np.abs(tv))), 1e-12)
        dt = min(0.45 * dx / speed, t - time)
        u_b = tv[np.searchsorted(tb, time, side="right")]
        left = np.concatenate([[u_b], u])
        right = np.concatenate([u, [u[-1]]])
        F = flux(left, right)
        u = u - dt / dx * (F[1:] - F[:-1])
        time += dt
    return xc, u


# ----------------------------------------------------------------------
# L1 distance

def _profile_kind(profile):
    if callable(profile) and not isinstance(profile, tuple):
        return "callable", profile
    xs, vals = profile
    xs = np.asarray(xs, dtype=float).reshape(-1)
    vals = np.asarray(vals, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    if vals.shape[0] == xs.size + 1:
        return "step", (xs, vals)
    if vals.shape[0] == xs.size:
        return "sampled", (xs, vals)
    raise ValueError("profile must be (breaks, len+1 values) or (grid, len values)")


def _evaluate(kind, data, grid: np.ndarray) -> np.ndarray:
    if kind == "callable":
        out = np.asarray(data(grid), dtype=float)
        return out[:, None] if out.ndim == 1 else out
    xs, vals = data
    if kind == "step":
        return vals[np.searchsorted(xs, grid, side="right")]
    return np.column_stack([np.interp(grid, xs, vals[:, j]) for j in range(vals.shape[1])])


def l1_distance(profile_a, profile_b, domain: tuple[float, float], points: int = 20001) -> float:
    """``L1`` distance (componentwise absolute values summed) on ``domain``.

    Two step functions ``(breaks, values)`` are integrated exactly. Any
    other pair is sampled on a grid containing the sample points of the
    sampled profiles and integrated by the trapezoid rule.
    """
    lo, hi = map(float, domain)
    ka, da = _profile_kind(profile_a)
    kb, db = _profile_kind(profile_b)
    if ka == kb == "step":
        cuts = np.concatenate([da[0], db[0]])
        cuts = np.unique(np.concatenate([[lo, hi], cuts[(cuts > lo) & (cuts < hi)]]))
        mids = 0.5 * (cuts[1:] + cuts[:-1])
        diff = np.abs(_evaluate(ka, da, mids) - _evaluate(kb, db, mids)).sum(axis=1)
        return float(np.sum(diff * np.diff(cuts)))
    grid = [np.linspace(lo, hi, points)]
    for kind, data in ((ka, da), (kb, db)):
        if kind == "sampled":
            grid.append(data[0][(data[0] >= lo) & (data[0] <= hi)])
    grid = np.unique(np.concatenate(grid))
    diff = np.abs(_evaluate(ka, da, grid) - _evaluate(kb, db, grid)).sum(axis=1)
    return float(np.trapezoid(diff, grid) if hasattr(np, "trapezoid") else np.trapz(diff, grid))


# ----------------------------------------------------------------------
# interaction estimates

@dataclass
class EstimateReport:
    """Outcome of one interaction-estimate sweep.

    ``sup_ratio`` is the largest ``LHS / RHS`` over resolved samples.
    ``tail_ratio`` and ``head_ratio`` are the sups over the lower and upper
    halves (log scale) of the strength range, so a tail that blows up as
    strengths go to zero shows as ``tail_ratio >> head_ratio``.
    ``max_violation`` is the largest left-hand side among samples whose
    right-hand side is exactly zero.
    """

    estimate_id: str
    sample_count: int
    sup_ratio: float
    max_violation: float
    sweep_spec: dict
    tail_ratio: float = 0.0
    head_ratio: float = 0.0
    zero_rhs_count: int = 0
    unresolved: int = 0
    not_applicable: int = 0
    failures: int = 0
    extras: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.sup_ratio)

    def as_dict(self, rows: bool = False) -> dict:
        out = asdict(self)
        if not rows:
            out.pop("rows")
        return out


def _strength(rng: np.random.Generator, lo: float, hi: float, sign: int = 0) -> float:
    mag = math.exp(rng.uniform(math.log(lo), math.log(hi)))
    if sign == 0:
        sign = 1 if rng.random() < 0.5 else -1
    return sign * mag


def _random_state(system: ConservationSystem, rng: np.random.Generator, spread: float) -> np.ndarray:
    R = system.right_vectors(system.u_star)
    for _ in range(50):
        u = system.u_star + R @ rng.uniform(-spread, spread, system.N)
        if system.in_box(u, slack=0.5):
            return u
    return system.u_star.copy()


def _trace_coords(system, model, ubar, rng, size: float, zero_k: float = 0.3):
    """Layer coordinates compatible with the trace ``ubar``."""
    xi = rng.uniform(-size, size, model.stable_count)
    if not model.characteristic or rng.random() < zero_k:
        return xi, 0.0
    k = model.k
    lam = system.eigenvalue(ubar, k)
    if lam > TIE_TOL:
        return xi, 0.0
    if model.kind == GNL:
        top = underline_s(system, ubar, k) if lam < 0 else 0.0
        return xi, float(rng.uniform(-size, top))
    return xi, float(rng.uniform(-size, size))


def _solve(system, model, u_plus, u_b, xi, xi_k):
    guess = np.concatenate([xi, [xi_k], np.zeros(system.N - model.k)])
    return solve_boundary_riemann(system, model, u_plus, u_b, guess=guess, tol=1e-12)


def _deviation(sol, xi, center) -> float:
    """``sum |xi - xi'| + |s'_k - center| + sum_{i>k} |s'_i|``."""
    return float(np.sum(np.abs(sol.trace.xi - xi)) + abs(sol.s_k - center)
                 + np.sum(np.abs(sol.fan.strengths)))


def _sample(args) -> dict:
    system, model, estimate, spec, index = args
    rng = np.random.default_rng([int(spec["seed"]), index])
    row = {"index": index, "strength": 0.0, "lhs": 0.0, "rhs": 0.0, "status": "ok"}
    try:
        row.update(_SAMPLERS[estimate](system, model, rng, spec))
    except Exception as exc:  # solver failures are recorded per sample
        row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
    return row


def _sample_nc(system, model, rng, spec):
    k = model.k
    j = int(rng.integers(1, k))
    u_plus = _random_state(system, rng, spec["spread"])
    s_j = _strength(rng, spec["s_min"], spec["s_max"])
    ubar = fan_state(system, j, u_plus, s_j)
    xi, xi_k = _trace_coords(system, model, ubar, rng, spec["trace_size"])
    u_b = phi(system, model, ubar, xi, xi_k)
    sol = _solve(system, model, u_plus, u_b, xi, xi_k)
    return {"strength": abs(s_j), "lhs": _deviation(sol, xi, xi_k), "rhs": abs(s_j)}


def _k_hit(system, model, rng, spec, u_plus=None, sign: int = 0):
    k = model.k
    if u_plus is None:
        u_plus = _random_state(system, rng, spec["spread"])
    s_k = _strength(rng, spec["s_min"], spec["s_max"], sign)
    ubar = fan_state(system, k, u_plus, s_k)
    xi, xi_k = _trace_coords(system, model, ubar, rng, spec["trace_size"])
    u_b = phi(system, model, ubar, xi, xi_k)
    sol = _solve(system, model, u_plus, u_b, xi, xi_k)
    return u_plus, s_k, xi, xi_k, sol


def _sample_me(system, model, rng, spec):
    if model.kind != GNL:
        raise ValueError("estimate needs a genuinely nonlinear boundary family")
    u_plus, s_k, xi, xi_k, sol = _k_hit(system, model, rng, spec)
    sig = varsigma(system, u_plus, s_k, model.k)
    lhs = _deviation(sol, xi, xi_k + s_k)
    out = {"strength": abs(s_k), "lhs": lhs, "rhs": abs(s_k) * (max(-sig, 0.0) + abs(xi_k))}
    if sig >= 0:
        out["status"] = "zero-rhs" if xi_k == 0.0 else "not-applicable"
        out["rhs"] = 0.0 if xi_k == 0.0 else out["rhs"]
    return out


def _sample_melindeg(system, model, rng, spec):
    if model.kind == GNL:
        raise ValueError("estimate needs a linearly degenerate boundary family")
    u_plus, s_k, xi, xi_k, sol = _k_hit(system, model, rng, spec)
    lam = system.eigenvalue(u_plus, model.k)
    rhs = abs(s_k) * (abs(xi_k) + max(-lam, 0.0))
    out = {"strength": abs(s_k), "lhs": _deviation(sol, xi, xi_k + s_k), "rhs": rhs}
    if rhs == 0.0:
        out["status"] = "zero-rhs"
    return out


def _shift_speed(system, u, k, target):
    """Move ``u`` along ``r_k`` until ``lambda_k`` equals ``target`` (two Newton steps)."""
    for _ in range(2):
        u = u + (target - system.eigenvalue(u, k)) * system.right_vector(u, k)
    return u


def _sample_rarepiccola(system, model, rng, spec):
    k = model.k
    if model.kind != GNL or system.N == k:
        raise ValueError("estimate needs a genuinely nonlinear boundary family below the top")
    base = _random_state(system, rng, spec["spread"])
    s_k = _strength(rng, spec["s_min"], spec["s_max"], -1)
    # first pass: how much do the outgoing waves raise the speed for this hit?
    u_plus = _shift_speed(system, base, k, -1e-3)
    ubar = fan_state(system, k, u_plus, s_k)
    xi, xi_k = _trace_coords(system, model, ubar, rng, spec["trace_size"], zero_k=0.0)
    sol = _solve(system, model, u_plus, phi(system, model, ubar, xi, xi_k), xi, xi_k)
    rise = system.eigenvalue(sol.u_hat, k) - system.eigenvalue(u_plus, k)
    out = {"strength": abs(s_k), "rhs": 0.0, "status": "not-applicable"}
    if rise <= RESOLUTION_FLOOR:
        return out
    # second pass: put the right state just below sonic so that the rise flips the sign
    u_plus = _shift_speed(system, base, k, -rise * rng.uniform(0.05, 0.95))
    ubar = fan_state(system, k, u_plus, s_k)
    sol = _solve(system, model, u_plus, phi(system, model, ubar, xi, xi_k), xi, xi_k)
    sig = varsigma(system, u_plus, s_k, k)
    out["rhs"] = abs(s_k) * (abs(xi_k) + max(-sig, 0.0))
    if not (system.eigenvalue(u_plus, k) < 0 < system.eigenvalue(sol.u_hat, k)
            and sol.s_k < 0 and sig < 0):
        return out
    out["status"] = "ok"
    out["lhs"] = min(abs(sol.s_k), abs(bar_s(system, sol.u_hat, k)))
    return out


def _sample_pallido2(system, model, rng, spec):
    k = model.k
    if model.kind != GNL or k < 2:
        raise ValueError("estimate needs a genuinely nonlinear boundary family above the first")
    j = int(rng.integers(1, k))
    # states close to the sonic point, where an entering rarefaction is possible
    u_plus = _random_state(system, rng, 0.3 * spec["spread"])
    s_j = _strength(rng, spec["s_min"], spec["s_max"])
    ubar = fan_state(system, j, u_plus, s_j)
    xi, xi_k = _trace_coords(system, model, ubar, rng, spec["trace_size"])
    u_b = phi(system, model, ubar, xi, xi_k)
    sol = _solve(system, model, u_plus, u_b, xi, xi_k)
    lhs = _hat_condition(system, model, sol, strict=False)
    if lhs is None:
        return {"strength": abs(s_j), "rhs": abs(s_j), "status": "not-applicable"}
    return {"strength": abs(s_j), "lhs": lhs, "rhs": abs(s_j)}


def _hat_condition(system, model, sol, strict: bool) -> float | None:
    k = model.k
    lam_hat = system.eigenvalue(sol.u_hat, k)
    if lam_hat < 0:
        return None
    sb = bar_s(system, sol.u_hat, k)
    if (sol.s_k < sb) if strict else (sol.s_k <= sb):
        return abs(sb)
    return None


def _datum_jump(system, model, rng, spec):
    u_star = _random_state(system, rng, spec["spread"])
    xi, xi_k = _trace_coords(system, model, u_star, rng, spec["trace_size"])
    ub_minus = phi(system, model, u_star, xi, xi_k)
    size = abs(_strength(rng, spec["s_min"], spec["s_max"]))
    direction = rng.uniform(-1.0, 1.0, system.N)
    jump = size * direction / np.sum(np.abs(direction))
    sol = _solve(system, model, u_star, ub_minus + jump, xi, xi_k)
    return xi, xi_k, size, sol


def _sample_jd1(system, model, rng, spec):
    xi, xi_k, size, sol = _datum_jump(system, model, rng, spec)
    return {"strength": size, "lhs": _deviation(sol, xi, xi_k), "rhs": size}


def _sample_pallido(system, model, rng, spec):
    if model.kind != GNL:
        raise ValueError("estimate needs a genuinely nonlinear boundary family")
    xi, xi_k, size, sol = _datum_jump(system, model, rng, {**spec, "spread": 0.3 * spec["spread"]})
    lhs = _hat_condition(system, model, sol, strict=True)
    if lhs is None:
        return {"strength": size, "rhs": size, "status": "not-applicable"}
    return {"strength": size, "lhs": lhs, "rhs": size}


def _sample_iebressan(system, model, rng, spec):
    N, k = system.N, model.k
    for _ in range(20):
        ia, ib = sorted(rng.integers(1, N + 1, size=2))[::-1]
        s_a = _strength(rng, spec["s_min"], spec["s_max"])
        s_b = _strength(rng, spec["s_min"], spec["s_max"])
        if ia != ib:
            break
        if system.field_kinds[ia - 1] == GNL and max(s_a, s_b) > 0:
            break
    else:
        raise ValueError("no approaching pair sampled")
    u_r = _random_state(system, rng, spec["spread"])
    u_m = fan_state(system, ib, u_r, s_b)
    u_l = fan_state(system, ia, u_m, s_a)
    fan = solve_riemann(system, u_l, u_r)
    s = fan.strengths
    if ia == ib:
        lhs = abs(s[ia - 1] - (s_a + s_b)) + float(np.sum(np.abs(np.delete(s, ia - 1))))
    else:
        lhs = (abs(s[ia - 1] - s_a) + abs(s[ib - 1] - s_b)
               + float(np.sum(np.abs(np.delete(s, [ia - 1, ib - 1])))))
    out = {"strength": min(abs(s_a), abs(s_b)), "lhs": lhs, "rhs": abs(s_a * s_b),
           "families": [int(ia), int(ib)],
           "c7": max(float(np.sum(np.abs(u_l - u_m))) / abs(s_a),
                     float(np.sum(np.abs(u_m - u_r))) / abs(s_b))}
    if ia != ib and k in (ia, ib):
        # change of the k-front's speed when it crosses a front of another family
        if ia == k:
            before = varsigma(system, u_m, s_a, k)
            other = abs(s_b)
        else:
            before = varsigma(system, u_r, s_b, k)
            other = abs(s_a)
        after = varsigma(system, fan.states[k], s[k - 1], k)
        out["c3"] = abs(after - before) / other
        size = float(np.sum(np.abs(u_r - system.u_star))) + abs(s_a) + abs(s_b)
        out["c4"] = abs(before) / size
    return out


_SAMPLERS = {"nc": _sample_nc, "me": _sample_me, "melindeg": _sample_melindeg,
             "rarepiccola": _sample_rarepiccola, "pallido2": _sample_pallido2,
             "pallido": _sample_pallido, "jd1": _sample_jd1, "iebressan": _sample_iebressan}


def applicable_estimates(system: ConservationSystem, model: BoundaryLayerModel | None = None) -> list[str]:
    """Estimates whose hypotheses can hold for this system."""
    model = model or BoundaryLayerModel(system)
    out = ["jd1", "iebressan"]
    if model.k > 1:
        out.append("nc")
    if model.characteristic and model.kind == GNL:
        out += ["me", "pallido"]
        if model.k > 1:
            out.append("pallido2")
        if system.N > model.k:
            out.append("rarepiccola")
    elif model.characteristic:
        out.append("melindeg")
    return sorted(out, key=ESTIMATES.index)


def measure_estimate(system: ConservationSystem, estimate_id: str, sweep: dict | None = None,
                     model: BoundaryLayerModel | None = None) -> EstimateReport:
    """Sample an interaction estimate and report its left/right ratio.

    Parameters
    ----------
    system : ConservationSystem
    estimate_id : str
        One of ``ESTIMATES``.
    sweep : dict, optional
        ``samples``, strength range ``s_min``/``s_max``, ``trace_size`` of
        the layer coordinates, ``spread`` of the states around the
        reference state, ``seed``. Missing keys take ``DEFAULT_SWEEP``.
    """
    if estimate_id not in _SAMPLERS:
        raise ValueError(f"unknown estimate {estimate_id!r}; expected one of {ESTIMATES}")
    spec = {**DEFAULT_SWEEP, **(sweep or {})}
    model = model or BoundaryLayerModel(system)
    items = [(system, model, estimate_id, spec, i) for i in range(int(spec["samples"]))]
    rows = parallel_map(_sample, items)
    return _summarize(estimate_id, spec, rows)


def _summarize(estimate_id: str, spec: dict, rows: list) -> EstimateReport:
    ratios, strengths = [], []
    zero_lhs, unresolved, na, failed = [], 0, 0, 0
    extras: dict = {}
    for row in rows:
        status = row["status"]
        if status == "failed":
            failed += 1
            continue
        for key in ("c3", "c4", "c7"):
            if key in row:
                extras[key.upper()] = max(extras.get(key.upper(), 0.0), row[key])
        if status == "not-applicable":
            na += 1
            continue
        if status == "zero-rhs":
            zero_lhs.append(row["lhs"])
            continue
        if row["rhs"] < RESOLUTION_FLOOR:
            row["status"] = "unresolved"
            unresolved += 1
            continue
        row["ratio"] = row["lhs"] / row["rhs"]
        ratios.append(row["ratio"])
        strengths.append(row["strength"])
    ratios = np.asarray(ratios)
    strengths = np.asarray(strengths)
    split = math.sqrt(spec["s_min"] * spec["s_max"])
    low, high = ratios[strengths < split], ratios[strengths >= split]
    return EstimateReport(
        estimate_id=estimate_id, sample_count=int(ratios.size),
        sup_ratio=float(ratios.max()) if ratios.size else 0.0,
        max_violation=float(max(zero_lhs)) if zero_lhs else 0.0,
        sweep_spec=dict(spec),
        tail_ratio=float(low.max()) if low.size else 0.0,
        head_ratio=float(high.max()) if high.size else 0.0,
        zero_rhs_count=len(zero_lhs), unresolved=unresolved, not_applicable=na,
        failures=failed, extras=extras, rows=rows)


_CONSTANT_OF = {"nc": "C1", "me": "C2", "iebressan": "C5", "jd1": "C6", "rarepiccola": "C8",
                "melindeg": "C10", "pallido": "C11", "pallido2": "C12"}
_MEASURED_CACHE: dict = {}


def measured_constants(system: ConservationSystem, samples: int = 100, seed: int = 0,
                       s_max: float = 0.1) -> dict:
    """Empirical interaction constants ``C1..C12`` from estimate sweeps.

    Constants of estimates whose hypotheses cannot hold for the system are
    zero. Results are cached per system description and sweep.
    """
    key = (system.name, repr(sorted(system.describe().items())), samples, seed, s_max)
    if key in _MEASURED_CACHE:
        return dict(_MEASURED_CACHE[key])
    model = BoundaryLayerModel(system)
    sweep = {"samples": samples, "seed": seed, "s_max": s_max}
    C = {name: 0.0 for name in ("C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C10",
                                "C11", "C12")}
    for estimate in applicable_estimates(system, model):
        report = measure_estimate(system, estimate, sweep, model)
        C[_CONSTANT_OF[estimate]] = report.sup_ratio
        for name, value in report.extras.items():
            C[name] = max(C.get(name, 0.0), value)
    C["C7"] = max(C["C7"], 1.0)
    _MEASURED_CACHE[key] = dict(C)
    return C


# ----------------------------------------------------------------------
# boundary condition

def layer_boundary_value(system: ConservationSystem, model: BoundaryLayerModel, w, eta,
                         rtol: float = 1e-12) -> np.ndarray:
    """Boundary value of the uniformly stable layer ending at ``w``.

    ``eta`` are the amplitudes of the stable eigenvectors of the
    linearization at ``w``, referred to ``y = 0``. The orbit starts at
    ``y = Y`` on the stable subspace with amplitudes ``eta_j exp(mu_j Y)``
    and is integrated back to ``y = 0`` with an adaptive Runge-Kutta
    method. ``Y = 40 / gap`` unless the fastest mode would then grow by
    more than ``exp(14)``: a smaller start offset is lost to rounding in
    ``w + offset`` and in the flux difference of the layer equation.
    """
    w = np.asarray(w, dtype=float)
    eta = np.asarray(eta, dtype=float).reshape(-1)
    m = model.stable_count
    if m == 0 or not np.any(eta):
        return w.copy()
    h = system.h
    mu, V = model.spectrum(w)
    order = np.argsort(mu)[:m]
    rates, Vz = mu[order], V[h:, order]
    if np.any(rates >= 0):
        raise ValueError(f"fewer than {m} decaying layer modes at {w}: {mu}")
    Y = min(40.0 / float(np.min(np.abs(rates))), 14.0 / float(np.max(np.abs(rates))))
    rhs = model.layer_field(w)
    start = w[h:] + Vz @ (eta * np.exp(rates * Y))
    sol = solve_ivp(lambda y, z: rhs(z), (Y, 0.0), start, method="DOP853", rtol=rtol,
                    atol=1e-15)
    if not sol.success:
        raise RuntimeError(f"layer integration failed: {sol.message}")
    return model.lift(sol.y[:, -1], w)


def underline_reconstruction(system: ConservationSystem, model: BoundaryLayerModel, ubar,
                             xi_k: float) -> np.ndarray:
    """``t_k(ubar, s_under(ubar))`` when ``xi_k`` sits on the zero-speed shock, else ``ubar``."""
    ubar = np.asarray(ubar, dtype=float)
    if not model.characteristic or model.kind != GNL:
        return ubar.copy()
    k = model.k
    if system.eigenvalue(ubar, k) > 0:
        return ubar.copy()
    su = underline_s(system, ubar, k)
    if su > 0 and abs(xi_k - su) <= SHOCK_MATCH_TOL:
        return hugoniot(system, k, ubar, su, check_box=False).state
    return ubar.copy()


def _fit_layer(system, model, w, u_b, xi_k_guess: float | None, center: bool) -> dict:
    """Least-squares fit of layer parameters so that the layer from ``w`` meets ``beta = 0``."""
    m = model.stable_count

    def boundary_value(p):
        base = zeta_k(system, model, w, float(p[m])).state if center else w
        return layer_boundary_value(system, model, base, p[:m])

    def residual(p):
        return beta(system, boundary_value(p), u_b, model.basis)

    n = m + (1 if center else 0)
    if n == 0:
        r = residual(np.zeros(0))
        return {"residual": float(np.max(np.abs(r))), "params": []}
    # linear start: u_b - w along the stable vectors and the center direction
    p0 = np.zeros(n)
    if center and xi_k_guess is not None:
        p0[m] = xi_k_guess
    if m:
        mu, V = model.spectrum(w)
        cols = V[:, np.argsort(mu)[:m]]
        p0[:m] = np.linalg.lstsq(cols, np.asarray(u_b) - boundary_value(p0), rcond=None)[0]
    fit = least_squares(residual, p0, method="trf",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200 * (n + 1))
    return {"residual": float(np.max(np.abs(fit.fun))), "params": fit.x.tolist()}


def boundary_layer_residual(system: ConservationSystem, model: BoundaryLayerModel, ubar, u_b,
                            xi_k: float = 0.0) -> dict:
    """How well a boundary layer joins the trace ``ubar`` to the datum ``u_b``.

    The state behind the layer is reconstructed from ``xi_k``; when it
    differs from ``ubar`` (a zero-speed shock at the boundary) both targets
    are tried, the better residual is reported and the sample is flagged.
    """
    ubar = np.asarray(ubar, dtype=float)
    u_b = np.asarray(u_b, dtype=float)
    under = underline_reconstruction(system, model, ubar, xi_k)
    k = model.k
    lam = system.eigenvalue(ubar, k)
    center = model.characteristic and lam <= TIE_TOL
    attempts = [("trace", _fit_layer(system, model, ubar, u_b, xi_k, center))]
    rh = 0.0
    if not np.array_equal(under, ubar):
        attempts.append(("shock", _fit_layer(system, model, under, u_b, None, False)))
        rh = float(np.max(np.abs(system.flux(ubar) - system.flux(under))))
    target, best = min(attempts, key=lambda a: a[1]["residual"])
    return {"residual": best["residual"], "target": target, "params": best["params"],
            "rh_residual": rh, "flagged": len(attempts) > 1,
            "shock_reconstructed": len(attempts) > 1}


@dataclass
class BoundaryConditionReport:
    rows: list
    admissible: int
    passed: int
    fraction: float
    max_rh_residual: float
    tol: float

    def as_dict(self) -> dict:
        return asdict(self)


def verify_boundary_condition(system: ConservationSystem, model: BoundaryLayerModel,
                              trace_history: list, datum_schedule, sample_times,
                              eps: float = 0.0, event_times=(), tol: float = 1e-6
                              ) -> BoundaryConditionReport:
    """Check the boundary condition of an approximate solution at sampled times.

    At each time the trace in force (the last record at or before it) is
    joined by a boundary layer to the datum ``datum_schedule(t)``. Times
    closer than ``eps`` to a boundary event are not admissible.
    """
    history = sorted(trace_history, key=lambda e: e["t"])
    stamps = np.array([e["t"] for e in history])
    events = np.asarray(list(event_times), dtype=float)
    rows = []
    for t in sample_times:
        t = float(t)
        admissible = not (events.size and np.min(np.abs(events - t)) < eps)
        i = int(np.searchsorted(stamps, t, side="right")) - 1
        row = {"t": t, "admissible": admissible, "residual": math.nan, "rh_residual": 0.0,
               "flagged": False, "error": ""}
        if i < 0:
            row["error"] = "no trace before this time"
            rows.append(row)
            continue
        entry = history[i]
        try:
            res = boundary_layer_residual(system, model, entry["ubar"], datum_schedule(t),
                                          float(entry.get("xi_k", 0.0)))
            row.update(residual=res["residual"], rh_residual=res["rh_residual"],
                       flagged=res["flagged"], target=res["target"])
        except Exception as exc:  # shooting failures are reported per sample
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    good = [r for r in rows if r["admissible"]]
    passed = sum(1 for r in good if r["residual"] <= tol)
    return BoundaryConditionReport(
        rows=rows, admissible=len(good), passed=passed,
        fraction=passed / len(good) if good else 1.0,
        max_rh_residual=max((r["rh_residual"] for r in rows), default=0.0), tol=tol)


def check_trajectory_boundary(traj, system: ConservationSystem, datum, eps: float,
                              sample_times=None, samples: int = 40, tol: float = 1e-6
                              ) -> BoundaryConditionReport:
    """``verify_boundary_condition`` on a finished run, excluding times near boundary events."""
    model = traj.final_state.model
    t_end = traj.final_state.time
    if sample_times is None or not len(sample_times):
        sample_times = np.linspace(0.0, t_end, samples + 2)[1:-1]
    event_times = [e["t"] for e in traj.events if e["kind"] in ("boundary", "datum")]
    return verify_boundary_condition(system, model, traj.traces, datum, sample_times,
                                     eps=eps, event_times=event_times, tol=tol)


# ----------------------------------------------------------------------
# convergence

def _study_row(args) -> dict:
    from . import tracker

    scenario, eps, time, constants, keep = args
    system = scenario.make_system()
    if constants is None:
        traj = tracker.simulate(scenario, system=system, eps=eps)
    else:
        traj = tracker.run(scenario, constants=constants, system=system, eps=eps)
    d = traj.diagnostics
    xs, states = traj.snapshots[time]
    row = {"eps": eps, "events": d["events"], "sup_tv": traj.sup_tv,
           "flux_trace_tv": d["flux_trace_tv"], "max_rarefaction": d["max_rarefaction"],
           "np_total": d["max_np_total"], "final_np_total": d["final_np_total"],
           "r_eps": traj.params.r_eps, "runtime": d["runtime"],
           "profile": (np.asarray(xs), np.asarray(states))}
    if constants is not None:
        row["upsilon0"] = d["upsilon0"]
        row["all_passed"] = d["all_passed"]
        row["lambda_increases"] = [
            v["dLambda"] for ev, v in zip(traj.events, traj.verdicts)
            if ev["kind"] in ("boundary", "datum") and not v["lambda_passed"]]
    if scenario.system_id == "burgers":
        u0, ub = scenario.data(system)
        grid = np.linspace(0.0, scenario.x_max, 20001)[1:]
        exact = exact_scalar(u0, ub, time, grid)
        row["exact_l1"] = l1_distance((xs, states), (grid, exact), (grid[0], scenario.x_max))
        row["data_tv"] = u0.total_variation() + ub.total_variation() + float(
            np.sum(np.abs(u0.values[0] - ub.values[0])))
    if keep:
        row["trajectory"] = traj
    return row


def convergence_study(scenario, eps_list, time: float = 1.0, constants=None,
                      keep_trajectories: bool = False) -> list[dict]:
    """Run a scenario for each ``eps`` and tabulate the convergence diagnostics.

    Each row holds the ``L1`` distance on ``[0, x_max]`` at ``time`` to the
    next (finer) ``eps`` in ``cauchy_l1``, the sup over time of the total
    variation, the flux-trace variation, the event count, the largest
    rarefaction front, the largest total non-physical strength, the runtime
    and, for Burgers, the ``L1`` error against ``exact_scalar``. With fixed
    ``constants`` every run is also scored: rows then carry the initial
    functional, the verdict flag and any increases of the flux-trace
    functional at boundary events and datum jumps.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be decreasing")
    snaps = sorted(set(scenario.snapshot_times) | {float(time)})
    sc = replace(scenario, snapshot_times=snaps, t_end=max(scenario.t_end, float(time)))
    rows = parallel_map(_study_row, [(sc, e, float(time), constants, keep_trajectories)
                                     for e in eps_list])
    for a, b in zip(rows, rows[1:]):
        a["cauchy_l1"] = l1_distance(a["profile"], b["profile"], (0.0, scenario.x_max))
    if rows:
        rows[-1]["cauchy_l1"] = math.nan
    return rows


__all__ = ["EstimateReport", "BoundaryConditionReport", "ESTIMATES", "exact_scalar",
           "godunov_burgers", "l1_distance", "measure_estimate", "applicable_estimates",
           "measured_constants", "layer_boundary_value", "underline_reconstruction",
           "boundary_layer_residual", "verify_boundary_condition",
           "check_trajectory_boundary", "convergence_study", "parallel_map", "worker_count"]
