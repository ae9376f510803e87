"""Acceptance criteria on the shipped scenario suite.

Every criterion records one PASS/FAIL line, printed in the terminal summary.
The expensive runs (reference runs, epsilon sweeps, boundary checks) are
shared through a session fixture.
"""
import math
import time

import numpy as np
import pytest

from fronttrack import boundary as bd
from fronttrack import tracker, verify, wavecurves as wc
from fronttrack.systems import make_system

from conftest import ACCEPTANCE_LINES

SLACK = 1.05
EPS_SWEEP = [0.04, 0.02, 0.01, 0.005]
REFERENCE_EPS = 0.01
CAUCHY_TIME = 1.0
CONVERGED = 1e-12      # Cauchy distances below this are rounding noise
SUITE = ["burgers-reflection", "p-system", "isentropic-euler-sonic", "euler-case-a",
         "linear-3x3", "euler-contact-boundary"]


def record(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.fixture(scope="session")
def study(scenarios):
    out = {}
    for name in SUITE:
        sc = scenarios[name]
        system = sc.make_system()
        start = time.perf_counter()
        ref = tracker.run(sc, system=system, eps=REFERENCE_EPS, slack=SLACK)
        elapsed = time.perf_counter() - start
        rows = verify.convergence_study(sc, EPS_SWEEP, CAUCHY_TIME, constants=ref.constants,
                                        keep_trajectories=True)
        _, ub = sc.data(system)
        finest = rows[-1]
        bc = verify.check_trajectory_boundary(finest["trajectory"], system, ub, finest["eps"])
        out[name] = {"scenario": sc, "ref": ref, "elapsed": elapsed, "rows": rows, "bc": bc}
    return out


def test_functional_decrease_on_every_event(study):
    bad = []
    for name, s in study.items():
        ref = s["ref"]
        failed = [v for v in ref.verdicts if not v["passed"]]
        if failed or s["elapsed"] > 60.0 or not ref.events:
            bad.append(f"{name}: {len(failed)}/{len(ref.verdicts)} failed, {s['elapsed']:.1f}s")
    events = sum(len(s["ref"].verdicts) for s in study.values())
    slowest = max(s["elapsed"] for s in study.values())
    record(1, not bad, f"{events} events over {len(study)} scenarios, slowest run "
                       f"{slowest:.1f}s" + (f"; {bad}" if bad else ""))
    assert not bad


def test_uniform_total_variation(study):
    bad = []
    worst = 0.0
    for name, s in study.items():
        tv = np.array([r["sup_tv"] for r in s["rows"]])
        spread = (tv.max() - tv.min()) / tv.min()
        worst = max(worst, spread)
        c14 = s["ref"].constants.measured_C["C14"]
        over = [r["eps"] for r in s["rows"] if r["sup_tv"] > c14 * r["upsilon0"] * (1 + 1e-12)]
        if spread > 0.5 or over:
            bad.append(f"{name}: spread {spread:.3f}, above C*Upsilon(0) at {over}")
    record(2, not bad, f"largest sup-TV spread {worst:.3%}" + (f"; {bad}" if bad else ""))
    assert not bad


def test_flux_trace_variation(study):
    bad = []
    worst = 1.0
    for name, s in study.items():
        ftv = np.array([r["flux_trace_tv"] for r in s["rows"]])
        ratio = ftv.max() / ftv.min() if ftv.min() > 0 else (1.0 if ftv.max() == 0 else math.inf)
        worst = max(worst, ratio)
        ups = sum(len(r["lambda_increases"]) for r in s["rows"])
        if ratio > 2.0 or ups:
            bad.append(f"{name}: ratio {ratio:.3f}, {ups} increases of Lambda")
    record(3, not bad, f"largest flux-trace ratio {worst:.3f}" + (f"; {bad}" if bad else ""))
    assert not bad


def test_scalar_exactness(study):
    rows = [r for r in study["burgers-reflection"]["rows"] if r["eps"] <= 0.01]
    bad = [(r["eps"], r["exact_l1"]) for r in rows if r["exact_l1"] > 5 * r["data_tv"] * r["eps"]]
    detail = ", ".join(f"eps {r['eps']}: {r['exact_l1']:.2e} <= {5 * r['data_tv'] * r['eps']:.2e}"
                       for r in rows)
    record(4, not bad, detail)
    assert not bad


def test_cauchy_convergence(study):
    bad = []
    for name, s in study.items():
        d = [r["cauchy_l1"] for r in s["rows"][:-1]]
        if not all(b <= a or b <= CONVERGED for a, b in zip(d, d[1:])):
            bad.append(f"{name}: {['%.2e' % x for x in d]}")
    record(5, not bad, f"distances decrease on {len(study) - len(bad)}/{len(study)} scenarios"
                       + (f"; {bad}" if bad else ""))
    assert not bad


ESTIMATE_CASES = [
    ("nc", "linear", {}),
    ("melindeg", "linear", {}),
    ("me", "p-system", {"characteristic_family": 1}),
    ("rarepiccola", "euler", {"characteristic_family": 1, "viscosity": "identity"}),
    ("pallido2", "p-system", {"characteristic_family": 2}),
]


def _half_sup(report) -> float:
    half = report.sweep_spec["samples"] // 2
    return max((r["ratio"] for r in report.rows if "ratio" in r and r["index"] < half),
               default=0.0)


@pytest.fixture(scope="session")
def estimates():
    out = {}
    for estimate, name, params in ESTIMATE_CASES:
        system = make_system(name, **params)
        out[estimate] = verify.measure_estimate(system, estimate,
                                                {"samples": 1000, "s_max": 0.1, "seed": 0})
    return out


def test_interaction_estimates(estimates):
    bad, parts = [], []
    for estimate, rep in estimates.items():
        half = _half_sup(rep)
        stable = rep.sup_ratio <= max(1.5 * half, 1e-6)
        no_blowup = rep.tail_ratio <= max(2.0 * rep.head_ratio, 1e-6)
        ok = rep.finite and rep.sample_count > 0 and stable and no_blowup and rep.failures == 0
        parts.append(f"{estimate} sup {rep.sup_ratio:.3g} ({rep.sample_count} samples)")
        if not ok:
            bad.append(f"{estimate}: sup {rep.sup_ratio}, half {half}, tail {rep.tail_ratio}, "
                       f"head {rep.head_ratio}, failures {rep.failures}")
    me = estimates["me"]
    if me.zero_rhs_count == 0 or me.max_violation > 1e-6:
        bad.append(f"me: zero-RHS samples {me.zero_rhs_count}, max LHS {me.max_violation}")
    parts.append(f"me zero-RHS max {me.max_violation:.1e}")
    record(6, not bad, "; ".join(parts) + (f"; {bad}" if bad else ""))
    assert not bad


def test_boundary_condition(study):
    bad, worst = [], 1.0
    for name, s in study.items():
        bc = s["bc"]
        worst = min(worst, bc.fraction)
        if bc.fraction < 0.95 or bc.max_rh_residual > 1e-8 or bc.admissible == 0:
            bad.append(f"{name}: fraction {bc.fraction:.3f}, RH {bc.max_rh_residual:.1e}")
    record(7, not bad, f"smallest passing fraction {worst:.3f}" + (f"; {bad}" if bad else ""))
    assert not bad


def test_structural_assertions(study):
    c9 = max(s["ref"].diagnostics["max_rarefaction"] / s["ref"].params.r_eps
             for s in study.values())
    bad = []
    for name, s in study.items():
        for traj in [s["ref"]] + [r["trajectory"] for r in s["rows"]]:
            d = traj.diagnostics
            counts = (d["incidence_violations"], d["reflection_violations"],
                      d["trace_violations"])
            if any(counts):
                bad.append(f"{name} eps {traj.params.eps}: violations {counts}")
            if d["max_rarefaction"] > SLACK * c9 * traj.params.r_eps:
                bad.append(f"{name} eps {traj.params.eps}: rarefaction "
                           f"{d['max_rarefaction']:.3g} > C9 r_eps")
    record(8, not bad, f"fitted C9 {c9:.3f}" + (f"; {bad}" if bad else ""))
    assert not bad


def test_curve_level_oracles():
    gamma = 1.4
    rng = np.random.default_rng(9)
    worst_curve = 0.0
    for frame in (1, 2):
        sy = make_system("p-system", gamma=gamma, characteristic_family=frame)
        for _ in range(50):
            u = np.array([rng.uniform(0.9, 1.1), rng.uniform(-0.05, 0.05)])
            s = rng.uniform(-0.1, 0.1)
            family = int(rng.integers(1, 3))
            c0 = sy.sound_speed(u[0])
            c1 = c0 - s if family == 1 else c0 + s
            tau = (c1 / np.sqrt(gamma)) ** (-2.0 / (gamma + 1.0))
            a = (1.0 - gamma) / 2.0
            integral = 2.0 * np.sqrt(gamma) / (1.0 - gamma) * (tau ** a - u[0] ** a)
            w = u[1] + integral if family == 1 else u[1] - integral
            got = wc.rarefaction_curve(sy, family, u, s, check_box=False)
            worst_curve = max(worst_curve, float(np.max(np.abs(got - [tau, w]))))
            h = wc.hugoniot(sy, family, u, abs(s), check_box=False)
            dtau = h.state[0] - u[0]
            sigma = np.sqrt(-(sy.pressure(h.state[0]) - sy.pressure(u[0])) / dtau)
            w_h = u[1] + (sigma * dtau if family == 1 else -sigma * dtau)
            speed = -sy.frame_speed + (-sigma if family == 1 else sigma)
            worst_curve = max(worst_curve, abs(h.state[1] - w_h), abs(h.speed - speed))
    lin = make_system("linear")
    model = bd.BoundaryLayerModel(lin)
    mu, V = np.linalg.eig(np.linalg.solve(lin.D, lin.F))
    stable = V[:, mu.real < -1e-12].real
    worst_brp = 0.0
    for _ in range(50):
        u_plus, u_b = rng.uniform(-0.2, 0.2, (2, 3))
        sol = bd.solve_boundary_riemann(lin, model, u_plus, u_b)
        coords = np.linalg.solve(np.column_stack([stable, lin.right_vectors(u_plus)[:, 1:]]),
                                 u_b - u_plus)
        got = np.concatenate([[sol.s_k], sol.fan.strengths])
        worst_brp = max(worst_brp, float(np.max(np.abs(got - coords[1:]))))
    ok = worst_curve <= 1e-8 and worst_brp <= 1e-10
    record(9, ok, f"p-system curves max error {worst_curve:.1e}, "
                  f"linear boundary solver max error {worst_brp:.1e}")
    assert ok
