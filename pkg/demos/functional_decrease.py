"""Score every event of a p-system run against the interaction functional.

Calibrates the weights on the run, then lists how much the functional drops
at each kind of event compared with the bound it has to beat.
"""
from collections import defaultdict
from pathlib import Path

from fronttrack import tracker
from fronttrack.scenario import Scenario

SCENARIO = Path(__file__).resolve().parents[1] / "scenarios" / "p_system.json"


def main():
    sc = Scenario.load(SCENARIO)
    traj = tracker.run(sc)
    c = traj.constants
    print(f"weights: A {c.A_weight:.3g}, K1 {c.K1:.3g}, K2 {c.K2:.3g}, K3 {c.K3:.3g}, "
          f"delta {c.delta:.3g}")
    print(f"Upsilon(0) {traj.diagnostics['upsilon0']:.4g}, sup TV {traj.sup_tv:.4g}")
    groups = defaultdict(list)
    for ev, v in zip(traj.events, traj.verdicts):
        groups[(ev["kind"], ev.get("solver"))].append(v)
    for (kind, solver), vs in sorted(groups.items(), key=lambda kv: str(kv[0])):
        margin = min(v["bound"] / 1.05 - v["dUpsilon"] for v in vs)
        print(f"{kind:9s} {str(solver):10s} {len(vs):5d} events, all pass: "
              f"{all(v['passed'] for v in vs)}, smallest margin {margin:.2e}")


if __name__ == "__main__":
    main()
