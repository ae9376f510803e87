"""Event-driven wave front tracking on the half line ``x > 0``.

The approximate solution is piecewise constant in ``x`` with finitely
many straight fronts. Between events nothing changes; at an event (two
fronts meeting, a front reaching ``x = 0``, or a jump of the boundary
datum) the local Riemann or boundary Riemann problem is solved, accurately
or with the simplified solver depending on the size of the interaction,
and the outgoing fronts replace the incoming ones.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import functionals as fn
from .boundary import (BoundaryLayerModel, BoundarySolution, BoundaryTraceState,
                       accurate_boundary_fronts, simplified_boundary_fronts,
                       solve_boundary_riemann, trace_property_holds)
from .fronts import NON_PHYSICAL, RAREFACTION, SHOCK, Front
from .riemann import accurate_fronts, simplified_fronts, solve_riemann
from .systems import GNL, ConservationSystem
from .wavecurves import varsigma

DEFAULT_EVENT_CAP = 1_000_000
JITTER = 1e-12
CHAIN_TOL = 1e-9


class EventCapExceeded(RuntimeError):
    """The simulation needed more events than allowed."""

    def __init__(self, message: str, dump: dict | None = None):
        super().__init__(message)
        self.dump = dump or {}


class NoEvent(Exception):
    """Nothing happens before the final time."""


class DataTooLarge(ValueError):
    """The initial interaction functional exceeds the smallness budget."""


class SolverAbort(RuntimeError):
    """A Riemann or boundary Riemann solve failed during an event."""

    def __init__(self, message: str, context: dict):
        super().__init__(message)
        self.context = context


# ----------------------------------------------------------------------
# data

@dataclass
class PiecewiseConstant:
    """Right-continuous step function: ``values[i]`` on ``[breaks[i-1], breaks[i])``."""

    breaks: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.breaks = np.asarray(self.breaks, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        self.values = values
        if self.values.shape[0] != self.breaks.size + 1:
            raise ValueError("need one more value than breakpoints")
        if np.any(np.diff(self.breaks) <= 0):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def constant(cls, value) -> "PiecewiseConstant":
        return cls(np.zeros(0), np.atleast_2d(np.asarray(value, dtype=float)))

    def __call__(self, x) -> np.ndarray:
        return self.values[int(np.searchsorted(self.breaks, x, side="right"))].copy()

    @property
    def jumps(self) -> np.ndarray:
        return np.sum(np.abs(np.diff(self.values, axis=0)), axis=1)

    def total_variation(self, start: float = -math.inf) -> float:
        """Variation over jumps located strictly after ``start``."""
        mask = self.breaks > start
        return float(self.jumps[mask].sum()) if self.breaks.size else 0.0

    def merged(self) -> "PiecewiseConstant":
        """Drop breakpoints across which the value does not change."""
        if not self.breaks.size:
            return self
        keep = self.jumps > 0
        values = np.vstack([self.values[:1], self.values[1:][keep]])
        return PiecewiseConstant(self.breaks[keep], values)


def _staircase(fun, lo: float, hi: float, eps: float, samples: int) -> PiecewiseConstant:
    grid = np.linspace(lo, hi, samples + 1)
    vals = np.array([np.atleast_1d(np.asarray(fun(x), dtype=float)) for x in grid])
    tv = float(np.sum(np.abs(np.diff(vals, axis=0))))
    if tv == 0.0:
        return PiecewiseConstant.constant(vals[0])
    # on each cell the L1 error of the left-endpoint value is at most
    # (variation on the cell) * width, so width = eps / tv suffices
    cells = max(1, int(math.ceil((hi - lo) * tv / eps)))
    nodes = np.linspace(lo, hi, cells + 1)[:-1]
    values = np.array([np.atleast_1d(np.asarray(fun(x), dtype=float)) for x in nodes])
    return PiecewiseConstant(nodes[1:], values).merged()


def approximate_data(u0, ub, eps: float, x_max: float = 1.0, t_max: float = 1.0,
                     samples: int = 4096) -> tuple[PiecewiseConstant, PiecewiseConstant, dict]:
    """Piecewise-constant approximations of the initial and boundary data.

    Step functions are returned unchanged; callables are replaced by a
    left-endpoint staircase on ``[0, x_max]`` (resp. ``[0, t_max]``), fine
    enough for an ``L1`` error of at most ``eps``. Sampling never increases
    the variation, and both staircases take their exact values at 0.
    """
    out = []
    for data, hi in ((u0, x_max), (ub, t_max)):
        if isinstance(data, PiecewiseConstant):
            out.append(data)
        elif callable(data):
            out.append(_staircase(data, 0.0, hi, eps, samples))
        else:
            out.append(PiecewiseConstant.constant(data))
    info = {"u0_jumps": int(out[0].breaks.size), "ub_jumps": int(out[1].breaks.size),
            "u0_tv": out[0].total_variation(), "ub_tv": out[1].total_variation()}
    return out[0], out[1], info


@dataclass
class EpsilonParams:
    """Approximation parameters: rarefaction size, dispatch threshold, non-physical speed."""

    eps: float
    r_eps: float | None = None
    omega_eps: float | None = None
    lambda_hat: float | None = None

    def resolved(self, system: ConservationSystem) -> "EpsilonParams":
        r_eps = self.eps if self.r_eps is None else self.r_eps
        omega = self.eps ** 2 if self.omega_eps is None else self.omega_eps
        lam = self.lambda_hat
        if lam is None or lam == "auto":
            top = system.max_speed()
            lam = max(1.1 * top, top + 0.1)
        return EpsilonParams(float(self.eps), float(r_eps), float(omega), float(lam))


# ----------------------------------------------------------------------
# state

@dataclass
class SimulationState:
    """Fronts, boundary trace and datum schedule at one time."""

    system: ConservationSystem
    model: BoundaryLayerModel
    time: float
    fronts: list
    trace: BoundaryTraceState
    datum: PiecewiseConstant
    params: EpsilonParams
    seed: int = 0
    flux_variation: float = 0.0
    next_id: int = 0

    def positions(self, t: float | None = None) -> np.ndarray:
        t = self.time if t is None else t
        return np.array([f.position + f.speed * (t - f.birth_time) for f in self.fronts])

    def speeds(self) -> np.ndarray:
        return np.array([f.speed for f in self.fronts])

    def remaining_datum_variation(self) -> float:
        return self.datum.total_variation(self.time)

    def next_datum_jump(self) -> float:
        later = self.datum.breaks[self.datum.breaks > self.time]
        return float(later[0]) if later.size else math.inf

    def total_variation(self) -> float:
        return float(sum(f.amplitude() for f in self.fronts))

    def chain_defect(self) -> float:
        """Largest mismatch between neighbouring states (should be ~0)."""
        worst = 0.0
        left = self.trace.ubar
        for f in self.fronts:
            worst = max(worst, float(np.max(np.abs(f.left_state - left))))
            left = f.right_state
        return worst

    def right_state(self) -> np.ndarray:
        return self.fronts[-1].right_state if self.fronts else self.trace.ubar


@dataclass
class Event:
    kind: str                 # "collision", "boundary" or "datum"
    time: float
    index: int = -1           # left front of a collision, 0 for a boundary hit
    position: float = 0.0
    separation: float = math.inf   # gap to the next candidate event time


@dataclass
class Trajectory:
    """Everything recorded during one run."""

    scenario: str
    params: EpsilonParams
    events: list = field(default_factory=list)
    raw_series: list = field(default_factory=list)
    initial_raw: fn.RawFunctionals | None = None
    snapshots: dict = field(default_factory=dict)
    traces: list = field(default_factory=list)
    retired: list = field(default_factory=list)
    final_state: SimulationState | None = None
    diagnostics: dict = field(default_factory=dict)
    constants: fn.FunctionalConstants | None = None
    verdicts: list = field(default_factory=list)

    def series(self, constants: fn.FunctionalConstants | None = None) -> list:
        c = constants or self.constants or fn.FunctionalConstants()
        return [raw.combine(c) for raw in self.raw_series]

    def evaluate(self, constants: fn.FunctionalConstants, slack: float = fn.DEFAULT_SLACK):
        self.constants = constants
        self.verdicts = fn.evaluate_events(self.events, constants, slack)
        self.diagnostics["all_passed"] = all(v["passed"] for v in self.verdicts)
        self.diagnostics["lambda_passed"] = all(v["lambda_passed"] for v in self.verdicts)
        return self.verdicts

    @property
    def sup_tv(self) -> float:
        return max((r.tv for r in self.raw_series), default=0.0)


# ----------------------------------------------------------------------
# helpers

def _jitter(seed: int, front_id: int) -> float:
    rng = np.random.default_rng([seed & 0xFFFFFFFF, front_id])
    return JITTER * (2.0 * rng.random() - 1.0)


def _varsigma_of(system: ConservationSystem, front: Front, k: int) -> float:
    """Speed entering the incidence rule and the functional ``S`` for a ``k``-front."""
    if system.field_kinds[k - 1] != GNL:
        return system.eigenvalue(front.right_state, k)
    if front.kind == SHOCK:
        return float(front.meta.get("sigma", front.speed))
    return system.eigenvalue(front.left_state, k)


def sample(state: SimulationState, positions) -> list[np.ndarray]:
    """States at the given positions (right limits at fronts)."""
    xs = state.positions()
    out = []
    for p in np.atleast_1d(np.asarray(positions, dtype=float)):
        idx = int(np.searchsorted(xs, p, side="right"))
        out.append((state.trace.ubar if idx == 0 else state.fronts[idx - 1].right_state).copy())
    return out


def profile(state: SimulationState, t: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints and the ``len + 1`` states of the current profile."""
    xs = state.positions(t)
    states = [state.trace.ubar] + [f.right_state for f in state.fronts]
    return xs, np.array(states)


# ----------------------------------------------------------------------
# engine

class Tracker:
    """Runs the front tracking scheme for one system, data set and parameter choice."""

    def __init__(self, system: ConservationSystem, u0: PiecewiseConstant, ub: PiecewiseConstant,
                 params: EpsilonParams, t_end: float, x_max: float, seed: int = 0,
                 event_cap: int = DEFAULT_EVENT_CAP, snapshot_times=(),
                 model: BoundaryLayerModel | None = None, name: str = "run"):
        self.system = system
        self.model = model or BoundaryLayerModel(system)
        self.params = params.resolved(system)
        self.u0, self.ub = u0, ub
        self.t_end, self.x_max = float(t_end), float(x_max)
        self.seed, self.cap = int(seed), int(event_cap)
        self.snapshot_times = sorted(float(t) for t in snapshot_times)
        self.k = self.model.k
        self.gnl = [i + 1 for i, kind in enumerate(system.field_kinds) if kind == GNL]
        self.traj = Trajectory(name, self.params)
        self.diag = {"incidence_violations": 0, "reflection_violations": 0,
                     "trace_violations": 0, "chain_defect": 0.0, "min_separation": math.inf,
                     "max_rarefaction": 0.0, "max_np_total": 0.0, "max_fronts": 0,
                     "boundary_events": 0, "collisions": 0, "datum_events": 0,
                     "accurate": 0, "simplified": 0, "max_generation": 1,
                     "max_brp_residual": 0.0, "relink_max": 0.0, "violations": []}
        self.state: SimulationState | None = None

    # -- bookkeeping ---------------------------------------------------

    def _register(self, front: Front, x: float, t: float, generation: int) -> Front:
        st = self.state
        front.id = st.next_id
        st.next_id += 1
        front.position, front.birth_time, front.generation = float(x), float(t), int(generation)
        front.left_state = np.array(front.left_state, dtype=float)
        front.right_state = np.array(front.right_state, dtype=float)
        if front.physical:
            if front.kind == SHOCK:
                front.meta["sigma"] = front.speed
            if front.family == self.k and self.model.characteristic:
                vs = _varsigma_of(self.system, front, self.k)
                front.meta["varsigma"] = vs
                jit = _jitter(self.seed, front.id)
                if vs >= 0.0:
                    jit = abs(jit)
                front.speed += jit
                if front.speed < 0.0 and vs >= 0.0:
                    self._violation("incidence", front.as_dict())
            else:
                front.speed += _jitter(self.seed, front.id)
            if front.kind == RAREFACTION:
                self.diag["max_rarefaction"] = max(self.diag["max_rarefaction"],
                                                   abs(front.strength))
        self.diag["max_generation"] = max(self.diag["max_generation"], front.generation)
        return front

    def _violation(self, kind: str, detail) -> None:
        key = {"incidence": "incidence_violations", "reflection": "reflection_violations",
               "trace": "trace_violations"}[kind]
        self.diag[key] += 1
        if len(self.diag["violations"]) < 50:
            self.diag["violations"].append({"kind": kind, "t": self.state.time,
                                            "detail": detail})

    def _link(self, fronts: list[Front], u_left, u_right) -> None:
        """Make the emitted fronts chain exactly from ``u_left`` to ``u_right``."""
        if not fronts:
            return
        worst = float(np.max(np.abs(fronts[0].left_state - u_left)))
        fronts[0].left_state = np.array(u_left, dtype=float)
        for a, b in zip(fronts[:-1], fronts[1:]):
            worst = max(worst, float(np.max(np.abs(b.left_state - a.right_state))))
            b.left_state = a.right_state.copy()
        worst = max(worst, float(np.max(np.abs(fronts[-1].right_state - u_right))))
        fronts[-1].right_state = np.array(u_right, dtype=float)
        for f in fronts:
            if not f.physical:
                f.strength = f.amplitude()
        self.diag["relink_max"] = max(self.diag["relink_max"], worst)

    def _raw(self) -> fn.RawFunctionals:
        st = self.state
        return fn.raw_components(st.fronts, st.trace.xi_k, self.k, self.model.kind,
                                 st.remaining_datum_variation(), st.flux_variation,
                                 st.time, self.gnl)

    def _set_trace(self, trace: BoundaryTraceState) -> None:
        st = self.state
        old = st.trace
        if old is not None:
            st.flux_variation += float(np.sum(np.abs(self.system.flux(trace.ubar)
                                                     - self.system.flux(old.ubar))))
        st.trace = trace
        if not trace_property_holds(self.system, self.model, trace):
            self._violation("trace", trace.as_dict())

    def _record_trace(self, event_kind: str, solver: str, residual: float) -> None:
        st = self.state
        entry = {"t": st.time, "event": event_kind, "solver": solver, "residual": residual}
        entry.update(st.trace.as_dict())
        self.traj.traces.append(entry)

    # -- initialization ------------------------------------------------

    def initialize(self) -> SimulationState:
        system, p = self.system, self.params
        u0, ub = self.u0, self.ub
        fronts: list[Front] = []
        dummy = BoundaryTraceState(u0.values[0].copy(), np.zeros(self.model.stable_count), 0.0,
                                   ub(0.0), "lax")
        self.state = SimulationState(system, self.model, 0.0, fronts, None, ub, p, self.seed)
        self.state.trace = dummy
        for x, left, right in zip(u0.breaks, u0.values[:-1], u0.values[1:]):
            if x <= 0.0:
                continue
            fan = solve_riemann(system, left, right)
            new = accurate_fronts(system, fan, p.r_eps)
            self._link(new, fronts[-1].right_state if fronts else u0(0.0), right)
            fronts.extend(self._register(f, x, 0.0, 1) for f in new)
        u_plus = u0(0.0)
        sol = self._solve_brp(u_plus, ub(0.0), {"event": "initial"})
        new = accurate_boundary_fronts(system, sol, p.r_eps, None, self.k)
        self._link(new, sol.trace.ubar, u_plus)
        self.state.fronts = [self._register(f, 0.0, 0.0, 1) for f in new] + fronts
        self.state.trace = sol.trace
        if not new:
            self.state.trace.ubar = u_plus.copy()
        if not trace_property_holds(system, self.model, self.state.trace):
            self._violation("trace", self.state.trace.as_dict())
        self._record_trace("initial", "accurate", sol.residual)
        self.traj.initial_raw = self._raw()
        self.traj.raw_series.append(self.traj.initial_raw)
        return self.state

    def _solve_brp(self, u_plus, u_b, context: dict) -> BoundarySolution:
        try:
            sol = solve_boundary_riemann(self.system, self.model, u_plus, u_b)
        except Exception as exc:  # noqa: BLE001 - reported with context
            ctx = dict(context, u_plus=np.asarray(u_plus).tolist(),
                       u_b=np.asarray(u_b).tolist(), t=getattr(self.state, "time", 0.0))
            raise SolverAbort(f"boundary Riemann solve failed: {exc}", ctx) from exc
        self.diag["max_brp_residual"] = max(self.diag["max_brp_residual"], sol.residual)
        return sol

    # -- events --------------------------------------------------------

    def next_event(self) -> Event:
        return next_event(self.state)

    def _retire(self) -> None:
        st = self.state
        xs = st.positions()
        cut = len(st.fronts)
        while cut > 0 and xs[cut - 1] > self.x_max:
            cut -= 1
        if cut < len(st.fronts):
            self._bury(st.fronts[cut:], "exit")
            del st.fronts[cut:]

    def _bury(self, fronts, cause: str) -> None:
        """Log fronts leaving the state, with the time and what ended them."""
        for f in fronts:
            self.traj.retired.append({"t": self.state.time, "cause": cause, **f.as_dict()})

    def resolve(self, event: Event) -> dict:
        st = self.state
        raw_before = self._raw()    # left limit: the datum jump at event.time still ahead
        raw_before.t = event.time
        st.time = event.time
        if event.kind == "collision":
            record = self._collision(event)
        elif event.kind == "boundary":
            record = self._boundary_hit(event)
        else:
            record = self._datum_jump(event)
        self.diag["chain_defect"] = max(self.diag["chain_defect"], st.chain_defect())
        self._retire()
        raw_after = self._raw()
        record.update({"index": len(self.traj.events), "t": event.time, "x": event.position,
                       "raw_before": raw_before, "raw_after": raw_after})
        self.traj.events.append(record)
        self.traj.raw_series.append(raw_after)
        self.diag["min_separation"] = min(self.diag["min_separation"], event.separation)
        self.diag["max_fronts"] = max(self.diag["max_fronts"], len(st.fronts))
        self.diag["max_np_total"] = max(self.diag["max_np_total"], raw_after.v_np)
        return record

    def _collision(self, event: Event) -> dict:
        st, p = self.state, self.params
        i = event.index
        a, b = st.fronts[i], st.fronts[i + 1]
        mags = [abs(a.strength) if a.physical else a.amplitude(),
                abs(b.strength) if b.physical else b.amplitude()]
        accurate = a.physical and b.physical and mags[0] * mags[1] >= p.omega_eps
        if accurate:
            try:
                fan = solve_riemann(self.system, a.left_state, b.right_state)
            except Exception as exc:  # noqa: BLE001
                raise SolverAbort(f"Riemann solve failed: {exc}",
                                  {"t": event.time, "fronts": [a.as_dict(), b.as_dict()]}) from exc
            exempt = [f.family for f in (a, b) if f.kind == RAREFACTION]
            new = accurate_fronts(self.system, fan, p.r_eps, exempt)
        else:
            new = simplified_fronts(self.system, a, b, p.lambda_hat)
        self._link(new, a.left_state, b.right_state)
        incoming = {}
        for f in (a, b):
            if f.physical:
                incoming[f.family] = min(incoming.get(f.family, f.generation), f.generation)
        top = max(a.generation, b.generation) + 1
        for f in new:
            gen = incoming.get(f.family, top) if f.physical else top
            self._register(f, event.position, event.time, gen)
        if not new and i + 2 < len(st.fronts):
            st.fronts[i + 2].left_state = a.left_state.copy()
        self._bury((a, b), "collision")
        st.fronts[i:i + 2] = new
        self.diag["collisions"] += 1
        self.diag["accurate" if accurate else "simplified"] += 1
        return {"kind": "collision", "solver": "accurate" if accurate else "simplified",
                "families": [a.family, b.family], "kinds": [a.kind, b.kind],
                "strengths": [a.strength, b.strength], "magnitudes": mags,
                "generations": [a.generation, b.generation], "emitted": len(new)}

    def _boundary_hit(self, event: Event) -> dict:
        st, p, system, model = self.state, self.params, self.system, self.model
        alpha = st.fronts[0]
        k = self.k
        u_plus = alpha.right_state
        s = alpha.strength
        xi_k = st.trace.xi_k
        is_k = alpha.physical and alpha.family == k and model.characteristic
        vminus = 0.0
        if is_k:
            if model.kind == GNL:
                vminus = max(-varsigma(system, u_plus, s, k), 0.0)
            else:
                vminus = max(-system.eigenvalue(u_plus, k), 0.0)
            accurate = abs(s) * (vminus + abs(xi_k)) >= p.omega_eps
        elif alpha.physical:
            accurate = abs(s) >= p.omega_eps
        else:
            accurate = False
        context = {"event": "boundary", "front": alpha.as_dict()}
        sol = None
        old_ubar = st.trace.ubar.copy()
        if accurate:
            sol = self._solve_brp(u_plus, st.trace.u_b, context)
            new = accurate_boundary_fronts(system, sol, p.r_eps, alpha.family, k)
            trace = sol.trace
        else:
            if is_k:
                sol = self._solve_brp(u_plus, st.trace.u_b, context)
            new, trace, sol = simplified_boundary_fronts(system, model, alpha, st.trace,
                                                         p.lambda_hat, p.r_eps, sol)
        u_left = trace.ubar
        self._link(new, u_left, u_plus)
        if not new:
            trace = trace.copy()
            trace.ubar = u_plus.copy()
        for f in new:
            keep = is_k and f.family == k and f.physical
            self._register(f, 0.0, event.time, alpha.generation if keep else alpha.generation + 1)
        if is_k and alpha.kind == SHOCK:
            emitted_k = [f for f in new if f.family == k and f.physical]
            if any(f.kind == RAREFACTION for f in emitted_k) or (
                    sol is not None and sol.branch in ("i", "ii", "iii")):
                self._violation("reflection", {"front": alpha.as_dict(),
                                               "branch": sol.branch if sol else None})
        self._bury((alpha,), "boundary")
        st.fronts[0:1] = new
        self._set_trace(trace)
        residual = sol.residual if sol is not None else 0.0
        self._record_trace("boundary", "accurate" if accurate else "simplified", residual)
        self.diag["boundary_events"] += 1
        self.diag["accurate" if accurate else "simplified"] += 1
        return {"kind": "boundary", "solver": "accurate" if accurate else "simplified",
                "families": [alpha.family], "kinds": [alpha.kind], "strengths": [s],
                "magnitudes": [abs(s) if alpha.physical else alpha.amplitude()],
                "generations": [alpha.generation],
                "hitting_class": "k" if is_k else "lower",
                "varsigma_minus": vminus, "xi_k_before": xi_k,
                "xi_k_after": trace.xi_k, "branch": sol.branch if sol else "kept",
                "emitted": len(new),
                "trace_jump": float(np.sum(np.abs(trace.ubar - old_ubar)))}

    def _datum_jump(self, event: Event) -> dict:
        st, p, system = self.state, self.params, self.system
        old_ub = st.trace.u_b
        new_ub = st.datum(event.time)
        u_plus = st.trace.ubar.copy() if not st.fronts else st.fronts[0].left_state.copy()
        sol = self._solve_brp(u_plus, new_ub, {"event": "datum"})
        new = accurate_boundary_fronts(system, sol, p.r_eps, None, self.k)
        self._link(new, sol.trace.ubar, u_plus)
        trace = sol.trace
        if not new:
            trace = trace.copy()
            trace.ubar = u_plus.copy()
        for f in new:
            self._register(f, 0.0, event.time, 1)
        st.fronts[0:0] = new
        self._set_trace(trace)
        self._record_trace("datum", "accurate", sol.residual)
        self.diag["datum_events"] += 1
        self.diag["accurate"] += 1
        jump = float(np.sum(np.abs(new_ub - old_ub)))
        return {"kind": "datum", "solver": "accurate", "families": [], "kinds": [],
                "strengths": [], "magnitudes": [], "datum_jump": jump,
                "xi_k_before": 0.0, "branch": sol.branch, "emitted": len(new)}

    # -- loop ----------------------------------------------------------

    def _take_snapshots(self, upto: float) -> None:
        st = self.state
        while self.snapshot_times and self.snapshot_times[0] <= upto:
            ts = self.snapshot_times.pop(0)
            xs, states = profile(st, ts)
            self.traj.snapshots[ts] = (xs, states)

    def run(self) -> Trajectory:
        start = _time.perf_counter()
        if self.state is None:
            self.initialize()
        while True:
            try:
                event = self.next_event()
            except NoEvent:
                break
            if event.time > self.t_end:
                break
            if len(self.traj.events) >= self.cap:
                raise EventCapExceeded(f"more than {self.cap} events before t={event.time}",
                                       {"time": event.time, "fronts": len(self.state.fronts),
                                        "diagnostics": dict(self.diag)})
            self._take_snapshots(event.time)
            self.resolve(event)
        self._take_snapshots(self.t_end)
        self.state.time = self.t_end
        self.traj.final_state = self.state
        self.diag["events"] = len(self.traj.events)
        self.diag["runtime"] = _time.perf_counter() - start
        self.diag["final_np_total"] = self._raw().v_np
        self.diag["sup_tv"] = self.traj.sup_tv
        self.diag["flux_trace_tv"] = self.state.flux_variation
        self.traj.diagnostics = self.diag
        return self.traj


def next_event(state: SimulationState) -> Event:
    """Earliest collision, boundary hit or datum jump after ``state.time``."""
    t = state.time
    candidates = []
    if state.fronts:
        xs = state.positions()
        sp = state.speeds()
        if xs.size > 1:
            closing = sp[:-1] - sp[1:]
            gap = np.maximum(xs[1:] - xs[:-1], 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                dt = np.where(closing > 0, gap / closing, np.inf)
            if np.isfinite(dt).any():
                order = np.argsort(dt)
                i = int(order[0])
                candidates.append((t + dt[i], "collision", i, xs[i] + sp[i] * dt[i]))
                if order.size > 1 and np.isfinite(dt[order[1]]):
                    candidates.append((t + dt[order[1]], "collision2", -1, 0.0))
        if sp[0] < 0:
            candidates.append((t + xs[0] / -sp[0], "boundary", 0, 0.0))
    tj = state.next_datum_jump()
    if math.isfinite(tj):
        candidates.append((tj, "datum", -1, 0.0))
    if not candidates:
        raise NoEvent("no further events")
    candidates.sort(key=lambda c: c[0])
    first = candidates[0]
    separation = candidates[1][0] - first[0] if len(candidates) > 1 else math.inf
    kind = "collision" if first[1] == "collision2" else first[1]
    return Event(kind, float(first[0]), int(first[2]), float(first[3]), float(separation))


def resolve_event(tracker: Tracker, event: Event) -> SimulationState:
    """Apply one event to the tracker's state."""
    tracker.resolve(event)
    return tracker.state


def simulate(scenario, system: ConservationSystem | None = None, eps: float | None = None,
             seed: int | None = None, cap: int | None = None) -> Trajectory:
    """Run a scenario without scoring its events."""
    system = system or scenario.make_system()
    params = scenario.epsilon_params(eps)
    u0, ub = scenario.data(system)
    u0, ub, info = approximate_data(u0, ub, params.eps, scenario.x_max, scenario.t_end)
    tracker = Tracker(system, u0, ub, params, scenario.t_end, scenario.x_max,
                      seed=scenario.seed if seed is None else seed,
                      event_cap=scenario.event_cap if cap is None else cap,
                      snapshot_times=scenario.snapshot_times, name=scenario.name)
    traj = tracker.run()
    traj.diagnostics["data"] = info
    return traj


def run(scenario, constants: fn.FunctionalConstants | None = None,
        system: ConservationSystem | None = None, eps: float | None = None,
        seed: int | None = None, cap: int | None = None,
        slack: float = fn.DEFAULT_SLACK, enforce_delta: bool = False) -> Trajectory:
    """Run a scenario and score every event against the functional bounds.

    Without explicit constants the scenario's own are used, or, if it asks
    for calibration, constants are fitted on this run's event log and
    ``delta`` is raised to cover the run's initial functional.
    """
    system = system or scenario.make_system()
    traj = simulate(scenario, system, eps, seed, cap)
    if constants is None:
        constants = scenario.functional_constants()
    if constants is None:
        from . import verify
        base = fn.recipe_constants(verify.measured_constants(system))
        constants, _ = fn.fit_to_events(base, traj.events, slack)
        constants = fn.cover_initial(constants, [traj])
    traj.evaluate(constants, slack)
    ups0 = traj.initial_raw.combine(constants).Upsilon
    traj.diagnostics["upsilon0"] = ups0
    if enforce_delta and ups0 > constants.delta:
        raise DataTooLarge(f"initial functional {ups0:.3g} exceeds delta {constants.delta:.3g}")
    return traj


__all__ = ["PiecewiseConstant", "EpsilonParams", "SimulationState", "Event", "Trajectory",
           "Tracker", "approximate_data", "next_event", "resolve_event", "run", "simulate",
           "sample", "profile", "EventCapExceeded", "NoEvent", "DataTooLarge", "SolverAbort",
           "NON_PHYSICAL"]
