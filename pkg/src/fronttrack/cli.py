"""Command-line front end: runs, sweeps, estimates, calibration, Riemann solves and plots.

Every output file is a deterministic function of the scenario and the seed:
CSVs carry a versioned comment line before the header and write floats with
17 significant digits, JSON keys are emitted in a fixed order, and SVGs are
written without timestamps and with a fixed id salt.

Exit status is 0 on success, 1 when a verdict or check fails, 2 on a usage
or parse error and 3 when a solver aborts.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import functionals as fn
from . import tracker, verify
from .boundary import BoundaryLayerModel, solve_boundary_riemann
from .fronts import NON_PHYSICAL, RAREFACTION, SHOCK
from .riemann import solve_riemann, wave_kind
from .scenario import Scenario, ScenarioError
from .systems import make_system
from .wavecurves import S_MAX, hugoniot

CSV_VERSION = 1
SUMMARY_SCHEMA = 1

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_ABORT = 0, 1, 2, 3

# errors raised by the numerical kernels; reported with exit status 3
SOLVER_ERRORS = (RuntimeError, ArithmeticError, np.linalg.LinAlgError)


class UsageError(Exception):
    """Bad command-line input."""


# ----------------------------------------------------------------------
# formatting

def fmt(x) -> str:
    """Float with 17 significant digits; integers and strings unchanged."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _plain(obj):
    """JSON-ready copy: numpy scalars and arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def write_json(path: Path, data) -> None:
    path.write_text(json.dumps(_plain(data), indent=2, sort_keys=False) + "\n")


def write_csv(path: Path, kind: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# fronttrack {kind} v{CSV_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_csv(path: Path) -> list[dict]:
    """Rows of a CSV written by ``write_csv``, values left as strings."""
    if not path.exists():
        return []
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _joined(values) -> str:
    return ";".join(fmt(v) for v in values)


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(";") if v != ""]


# ----------------------------------------------------------------------
# input helpers

def _load_scenario(path, seed: int | None = None, cap: int | None = None) -> Scenario:
    try:
        sc = Scenario.load(path)
    except FileNotFoundError:
        raise UsageError(f"scenario file not found: {path}") from None
    except ScenarioError as exc:
        raise UsageError(f"invalid scenario {path}: {exc}") from None
    if seed is not None:
        sc.seed = int(seed)
    if cap is not None:
        sc.event_cap = int(cap)
    return sc


def _param(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise UsageError(f"--param expects key=value, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def _system_from(args):
    if getattr(args, "scenario", None):
        sc = args.scenario[0] if isinstance(args.scenario, list) else args.scenario
        return _load_scenario(sc).make_system()
    if not getattr(args, "system", None):
        raise UsageError("give --scenario or --system")
    try:
        return make_system(args.system, **dict(_param(p) for p in args.param or []))
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def _eps_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"--eps-list: not a list of numbers: {text!r}") from None
    if not values or any(v <= 0 for v in values):
        raise UsageError("--eps-list needs positive values")
    return values


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ----------------------------------------------------------------------
# run

FRONTS_HEADER = ["index", "t", "x", "kind", "solver", "families", "front_kinds", "strengths",
                 "dUpsilon", "bound", "verdict", "lambda_verdict"]
SEGMENTS_HEADER = ["id", "family", "kind", "strength", "t_start", "x_start", "t_end", "x_end",
                   "cause"]
FUNCTIONALS_HEADER = ["t", "V", "Q", "R", "S", "Z", "Upsilon", "F", "Lambda", "xi_k_abs",
                      "tv", "fronts"]
TRACES_HEADER = ["t", "event", "solver", "branch", "residual", "xi_k", "ubar", "xi", "u_b"]


def _event_rows(traj):
    for ev, v in zip(traj.events, traj.verdicts):
        yield [ev["index"], ev["t"], ev["x"], ev["kind"], ev["solver"], _joined(ev["families"]),
               ";".join(ev["kinds"]), _joined(ev["strengths"]), v["dUpsilon"], v["bound"],
               "pass" if v["passed"] else "fail", "pass" if v["lambda_passed"] else "fail"]


def _segment_rows(traj):
    t_end = traj.final_state.time
    ended = [(f, f["t"], f["cause"]) for f in traj.retired]
    ended += [(f.as_dict(), t_end, "end") for f in traj.final_state.fronts]
    ended.sort(key=lambda item: (item[0]["birth_time"], item[0]["id"]))
    for f, t1, cause in ended:
        x1 = f["position"] + f["speed"] * (t1 - f["birth_time"])
        yield [f["id"], f["family"], f["kind"], f["strength"], f["birth_time"], f["position"],
               t1, x1, cause]


def _snapshot_rows(traj, x_max: float):
    """Each state from its left breakpoint, closed by the last state again at ``x_max``."""
    for t in sorted(traj.snapshots):
        xs, states = traj.snapshots[t]
        states = np.asarray(states, dtype=float)
        xs = np.concatenate([[0.0], np.asarray(xs, dtype=float)])
        for x, u in zip(xs, states):
            yield [t, x, *np.atleast_1d(u)]
        yield [t, max(x_max, xs[-1]), *np.atleast_1d(states[-1])]


def _functional_rows(traj):
    for raw in traj.raw_series:
        snap = raw.combine(traj.constants)
        yield [snap.t, snap.V, snap.Q, snap.R, snap.S, snap.Z, snap.Upsilon, snap.F, snap.Lambda,
               snap.xi_k_abs, raw.tv, raw.fronts]


def _trace_rows(traj):
    for tr in traj.traces:
        yield [tr["t"], tr["event"], tr["solver"], tr["branch"], tr["residual"], tr["xi_k"],
               _joined(tr["ubar"]), _joined(tr["xi"]), _joined(tr["u_b"])]


def run_summary(scenario: Scenario, traj) -> dict:
    """Deterministic summary of a scored run (no wall-clock fields)."""
    d = traj.diagnostics
    counts = {}
    for ev in traj.events:
        counts[ev["kind"]] = counts.get(ev["kind"], 0) + 1
    failed = [ev["index"] for ev, v in zip(traj.events, traj.verdicts) if not v["passed"]]
    boundary_drops = [v["dUpsilon"] for ev, v in zip(traj.events, traj.verdicts)
                      if ev["kind"] == "boundary"]
    return {
        "schema": SUMMARY_SCHEMA,
        "version": __version__,
        "scenario": scenario.name,
        "system": {"id": scenario.system_id, "params": scenario.system_params},
        "eps": traj.params.eps, "r_eps": traj.params.r_eps, "omega_eps": traj.params.omega_eps,
        "lambda_hat": traj.params.lambda_hat,
        "seed": scenario.seed,
        "t_end": traj.final_state.time,
        "events": len(traj.events),
        "event_counts": counts,
        "all_passed": bool(d["all_passed"]),
        "lambda_passed": bool(d["lambda_passed"]),
        "failed_events": failed,
        "boundary_upsilon_strictly_decreasing": all(x < 0 for x in boundary_drops),
        "upsilon0": d["upsilon0"],
        "sup_tv": traj.sup_tv,
        "flux_trace_tv": d["flux_trace_tv"],
        "max_rarefaction": d["max_rarefaction"],
        "max_np_total": d["max_np_total"],
        "final_np_total": d["final_np_total"],
        "violations": {"incidence": d["incidence_violations"],
                       "reflection": d["reflection_violations"],
                       "trace": d["trace_violations"]},
        "constants": traj.constants.as_dict(),
    }


def write_run(out: Path, scenario: Scenario, traj) -> dict:
    """Write the five run files and return the summary."""
    write_csv(out / "fronts.csv", "fronts-log", FRONTS_HEADER, _event_rows(traj))
    write_csv(out / "segments.csv", "front-segments", SEGMENTS_HEADER, _segment_rows(traj))
    n = traj.final_state.system.N
    write_csv(out / "snapshots.csv", "snapshots", ["t", "x"] + [f"u{i}" for i in range(1, n + 1)],
              _snapshot_rows(traj, scenario.x_max))
    write_csv(out / "functionals.csv", "functional-series", FUNCTIONALS_HEADER,
              _functional_rows(traj))
    write_csv(out / "traces.csv", "trace-history", TRACES_HEADER, _trace_rows(traj))
    summary = run_summary(scenario, traj)
    write_json(out / "summary.json", summary)
    return summary


def cmd_run(args) -> int:
    sc = _load_scenario(args.scenario, args.seed, args.cap)
    traj = tracker.run(sc, eps=args.eps, slack=args.slack)
    out = _out_dir(args.out)
    summary = write_run(out, sc, traj)
    print(f"{sc.name}: {summary['events']} events, sup TV {summary['sup_tv']:.6g}, "
          f"Upsilon(0) {summary['upsilon0']:.6g}")
    if summary["failed_events"]:
        first = traj.events[summary["failed_events"][0]]
        v = traj.verdicts[first["index"]]
        print(f"FAIL: {len(summary['failed_events'])} events break the decrease bound; first is "
              f"event {first['index']} ({first['kind']}, t={first['t']:.6g}, "
              f"families {first['families']}): dUpsilon {v['dUpsilon']:.3e} > "
              f"bound {v['bound']:.3e}", file=sys.stderr)
        return EXIT_FAILED
    print("all events pass")
    plot_run(out, out)
    return EXIT_OK


# ----------------------------------------------------------------------
# sweep

SWEEP_HEADER = ["eps", "events", "sup_tv", "flux_trace_tv", "max_rarefaction", "np_total",
                "final_np_total", "cauchy_l1", "exact_l1"]


def sweep_checks(rows: list[dict]) -> dict:
    """Uniformity of sup TV and flux-trace TV, and monotone Cauchy distances."""
    tv = [r["sup_tv"] for r in rows]
    ftv = [r["flux_trace_tv"] for r in rows]
    cauchy = [r["cauchy_l1"] for r in rows if not math.isnan(r["cauchy_l1"])]
    return {
        "sup_tv_spread": max(tv) / min(tv) - 1.0 if min(tv) > 0 else 0.0,
        "flux_trace_tv_ratio": max(ftv) / min(ftv) if min(ftv) > 0 else 1.0,
        "cauchy_monotone": all(b < a for a, b in zip(cauchy, cauchy[1:])),
    }


def cmd_sweep(args) -> int:
    sc = _load_scenario(args.scenario, args.seed, args.cap)
    eps = sorted(_eps_list(args.eps_list), reverse=True)
    rows = verify.convergence_study(sc, eps, time=args.time)
    out = _out_dir(args.out)
    write_csv(out / "sweep.csv", "eps-sweep", SWEEP_HEADER,
              ([r[h] if h in r else math.nan for h in SWEEP_HEADER] for r in rows))
    checks = sweep_checks(rows)
    passed = (checks["sup_tv_spread"] <= 0.5 and checks["flux_trace_tv_ratio"] <= 2.0
              and checks["cauchy_monotone"])
    write_json(out / "sweep.json", {"schema": SUMMARY_SCHEMA, "scenario": sc.name,
                                     "time": args.time, "eps": eps, "checks": checks,
                                     "passed": passed,
                                     "rows": [{h: r.get(h, math.nan) for h in SWEEP_HEADER}
                                              for r in rows]})
    for r in rows:
        print("  ".join(f"{h}={fmt(r[h]) if h in r else '-'}" for h in SWEEP_HEADER))
    print(f"sup-TV spread {checks['sup_tv_spread']:.3f}, flux-trace TV ratio "
          f"{checks['flux_trace_tv_ratio']:.3f}, Cauchy monotone {checks['cauchy_monotone']}")
    return EXIT_OK if passed else EXIT_FAILED


# ----------------------------------------------------------------------
# estimates and calibration

ESTIMATE_HEADER = ["index", "strength", "lhs", "rhs", "ratio", "status"]


def cmd_estimates(args) -> int:
    system = _system_from(args)
    model = BoundaryLayerModel(system)
    ids = args.estimate or verify.applicable_estimates(system, model)
    unknown = [e for e in ids if e not in verify.ESTIMATES]
    if unknown:
        raise UsageError(f"unknown estimate(s) {unknown}; known: {list(verify.ESTIMATES)}")
    sweep = {"samples": args.samples, "seed": args.seed, "s_max": args.s_max}
    out = _out_dir(args.out) if args.out else None
    reports = {}
    ok = True
    for eid in ids:
        rep = verify.measure_estimate(system, eid, sweep, model=model)
        reports[eid] = rep.as_dict()
        ok &= rep.finite
        print(f"{eid:12s} samples {rep.sample_count:5d}  sup ratio {rep.sup_ratio:.4g}  "
              f"zero-RHS max LHS {rep.max_violation:.3g}  failures {rep.failures}")
        if out is not None:
            write_csv(out / f"estimate_{eid}.csv", "estimate-samples", ESTIMATE_HEADER,
                      ([r.get(h, "") for h in ESTIMATE_HEADER] for r in rep.rows))
    if out is not None:
        write_json(out / "estimates.json", {"schema": SUMMARY_SCHEMA, "system": system.describe(),
                                            "sweep": sweep, "reports": reports})
    return EXIT_OK if ok else EXIT_FAILED


def cmd_calibrate(args) -> int:
    scenarios = [_load_scenario(p, args.seed, args.cap) for p in args.scenario]
    ids = {(s.system_id, json.dumps(s.system_params, sort_keys=True)) for s in scenarios}
    if len(ids) != 1:
        raise UsageError("calibrate needs scenarios of a single system")
    system = scenarios[0].make_system()
    constants = fn.calibrate(system, scenarios, slack=args.slack, samples=args.samples,
                             seed=args.seed or 0)
    data = {"schema": SUMMARY_SCHEMA, "system": system.describe(),
            "scenarios": [s.name for s in scenarios], "slack": args.slack,
            "constants": constants.as_dict()}
    if args.out:
        write_json(_out_dir(args.out) / "constants.json", data)
    for key, value in constants.as_dict().items():
        if key != "measured_C":
            print(f"{key:12s} {fmt(value)}")
    return EXIT_OK


# ----------------------------------------------------------------------
# one-shot solves

def _states(system, values: list[float], count: int, what: str) -> list[np.ndarray]:
    n = system.N
    if len(values) != count * n:
        raise UsageError(f"{what}: expected {count * n} numbers for N = {n}, got {len(values)}")
    return [np.array(values[i * n:(i + 1) * n]) for i in range(count)]


def describe_wave(system, family: int, s: float, left, right, s_max: float = S_MAX) -> str:
    kind = wave_kind(system, family, s)
    if kind == RAREFACTION:
        speed = (f"speeds {fmt(system.eigenvalue(left, family))} .. "
                 f"{fmt(system.eigenvalue(right, family))}")
    elif kind == SHOCK:
        speed = f"speed {fmt(hugoniot(system, family, right, s, s_max, check_box=False).speed)}"
    else:
        speed = f"speed {fmt(system.eigenvalue(right, family))}"
    return (f"{family}-{kind}: strength {fmt(s)}, {speed}, left {_joined(left)}, "
            f"right {_joined(right)}")


def cmd_riemann(args) -> int:
    system = _system_from(args)
    u_minus, u_plus = _states(system, args.states, 2, "riemann")
    fan = solve_riemann(system, u_minus, u_plus, s_max=args.s_max)
    lines = [describe_wave(system, i, float(s), *fan.wave(i)[1:], s_max=args.s_max)
             for i, s in enumerate(fan.strengths, start=1) if abs(s) > 0]
    print("\n".join(lines) if lines else "no waves")
    return EXIT_OK


def cmd_brp(args) -> int:
    system = _system_from(args)
    u_plus, u_b = _states(system, args.states, 2, "brp")
    model = BoundaryLayerModel(system)
    sol = solve_boundary_riemann(system, model, u_plus, u_b)
    k = model.k
    waves = []
    if sol.k_strength != 0.0:
        waves.append(describe_wave(system, k, sol.k_strength, sol.k_left, sol.u_hat))
    for offset, s in enumerate(sol.fan.strengths):
        if s != 0.0:
            fam = k + 1 + offset
            waves.append(describe_wave(system, fam, float(s), sol.fan.states[offset],
                                       sol.fan.states[offset + 1]))
    if waves:
        print(f"branch {sol.branch}")
        print("\n".join(waves))
    else:
        print(f"no waves emitted, branch {sol.branch}")
    tr = sol.trace
    print(f"trace {_joined(tr.ubar)}, layer xi {_joined(tr.xi) or '-'}, xi_k {fmt(tr.xi_k)}, "
          f"residual {sol.residual:.3g}")
    return EXIT_OK


# ----------------------------------------------------------------------
# plots

def _figure():
    import matplotlib
    from matplotlib.figure import Figure

    matplotlib.rcParams["svg.hashsalt"] = "fronttrack"
    return Figure(figsize=(7.0, 4.5))


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def plot_fronts(segments: list[dict], path: Path) -> None:
    """x-t diagram: one line per front, colored by family, non-physical fronts dashed."""
    from matplotlib import colormaps

    fig = _figure()
    ax = fig.add_subplot()
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title("front diagram")
    palette = colormaps["tab10"]
    for seg in segments:
        fam = int(seg["family"])
        npf = seg["kind"] == NON_PHYSICAL
        ax.plot([float(seg["x_start"]), float(seg["x_end"])],
                [float(seg["t_start"]), float(seg["t_end"])],
                color="0.5" if npf else palette((fam - 1) % 10),
                linestyle="--" if npf else "-", linewidth=0.6)
    _save(fig, path)


def plot_profiles(rows: list[dict], path: Path) -> None:
    """Piecewise-constant state profiles at the snapshot times, one panel per component."""
    comps = sorted((c for c in (rows[0] if rows else {}) if c.startswith("u")),
                   key=lambda c: int(c[1:]))
    fig = _figure()
    axes = [fig.add_subplot(max(len(comps), 1), 1, i + 1) for i in range(max(len(comps), 1))]
    axes[-1].set_xlabel("x")
    times = sorted({r["t"] for r in rows}, key=float)
    for i, c in enumerate(comps):
        axes[i].set_ylabel(c)
        for t in times:
            sel = [r for r in rows if r["t"] == t]
            xs = [float(r["x"]) for r in sel]
            us = [float(r[c]) for r in sel]
            axes[i].step(xs, us, where="post", label=f"t={float(t):g}", linewidth=0.8)
    if comps and times:
        axes[0].legend(fontsize="small")
    _save(fig, path)


def plot_functionals(rows: list[dict], path: Path) -> None:
    """Decay of the interaction functional and the flux-trace functional along the run."""
    fig = _figure()
    ax = fig.add_subplot()
    ax.set_xlabel("t")
    ax.set_ylabel("value")
    if rows:
        t = [float(r["t"]) for r in rows]
        ax.step(t, [float(r["Upsilon"]) for r in rows], where="post", label="Upsilon")
        ax.step(t, [float(r["Lambda"]) for r in rows], where="post", label="Lambda")
        ax.legend(fontsize="small")
    _save(fig, path)


def plot_run(run_dir: Path, out: Path) -> list[Path]:
    """SVGs for the CSVs found in ``run_dir``; missing or empty logs give bare axes."""
    out = _out_dir(out)
    paths = [out / "fronts.svg", out / "profiles.svg", out / "functionals.svg"]
    plot_fronts(read_csv(run_dir / "segments.csv"), paths[0])
    plot_profiles(read_csv(run_dir / "snapshots.csv"), paths[1])
    plot_functionals(read_csv(run_dir / "functionals.csv"), paths[2])
    return paths


def cmd_plot(args) -> int:
    run_dir = Path(args.run)
    if not run_dir.is_dir():
        raise UsageError(f"not a directory: {run_dir}")
    for p in plot_run(run_dir, Path(args.out or run_dir)):
        print(p)
    return EXIT_OK


# ----------------------------------------------------------------------
# entry point

def _abort_context(context) -> str:
    """Short description of the event a solver abort came from."""
    if not isinstance(context, dict):
        return ""
    text = f" during {context.get('event', 'an')} event"
    front = context.get("front")
    if isinstance(front, dict):
        text += (f" (front {front.get('id')}, family {front.get('family')}, "
                 f"{front.get('kind')})")
    return text


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fronttrack", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"fronttrack {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(q, scenario=True):
        if scenario:
            q.add_argument("--scenario", required=True, help="scenario JSON file")
        q.add_argument("--seed", type=int, default=None, help="override the jitter seed")
        q.add_argument("--cap", type=int, default=None, help="override the event cap")

    def system_args(q):
        q.add_argument("--scenario", help="take the system from this scenario file")
        q.add_argument("--system", help="system id, e.g. burgers or p-system")
        q.add_argument("--param", action="append", metavar="KEY=VALUE",
                       help="system parameter (repeatable)")

    q = sub.add_parser("run", help="run one scenario and write its logs")
    common(q)
    q.add_argument("--out", required=True)
    q.add_argument("--eps", type=float, default=None)
    q.add_argument("--slack", type=float, default=fn.DEFAULT_SLACK)
    q.set_defaults(func=cmd_run)

    q = sub.add_parser("sweep", help="epsilon sweep with convergence diagnostics")
    common(q)
    q.add_argument("--out", required=True)
    q.add_argument("--eps-list", default="0.04,0.02,0.01,0.005")
    q.add_argument("--time", type=float, default=1.0)
    q.set_defaults(func=cmd_sweep)

    q = sub.add_parser("estimates", help="measure interaction-estimate ratios")
    system_args(q)
    q.add_argument("--estimate", action="append", help="estimate id (repeatable)")
    q.add_argument("--samples", type=int, default=1000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--s-max", type=float, default=0.1)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_estimates)

    q = sub.add_parser("calibrate", help="fit functional weights on probe scenarios")
    q.add_argument("--scenario", action="append", required=True)
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--cap", type=int, default=None)
    q.add_argument("--samples", type=int, default=200)
    q.add_argument("--slack", type=float, default=fn.DEFAULT_SLACK)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_calibrate)

    for name, func, what in (("riemann", cmd_riemann, "left and right states"),
                             ("brp", cmd_brp, "interior state and boundary datum")):
        q = sub.add_parser(name, help=f"solve one {'boundary ' if name == 'brp' else ''}"
                                      f"Riemann problem")
        q.add_argument("system", help="system id")
        q.add_argument("states", nargs="+", type=float, help=what)
        q.add_argument("--param", action="append", metavar="KEY=VALUE")
        if name == "riemann":
            q.add_argument("--s-max", type=float, default=2.0,
                           help="largest wave strength searched")
        q.set_defaults(func=func)

    q = sub.add_parser("plot", help="SVG plots from a run directory")
    q.add_argument("--run", required=True, help="directory written by 'run'")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SOLVER_ERRORS as exc:
        where = _abort_context(getattr(exc, "context", None))
        print(f"solver abort{where}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
