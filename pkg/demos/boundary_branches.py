"""Walk through the six branches of the Burgers boundary Riemann problem.

For each interior state ``u_plus`` and boundary datum ``u_b`` the script
prints which wave (if any) enters the domain and what the boundary layer
absorbs.
"""
from fronttrack.boundary import BoundaryLayerModel, solve_boundary_riemann
from fronttrack.systems import make_system

CASES = [
    (0.1, 0.3, "shock with positive speed enters"),
    (0.3, 0.1, "rarefaction enters"),
    (0.2, -0.1, "rarefaction from the sonic state, layer for the rest"),
    (-0.1, 0.3, "shock strong enough to overcome the outflow"),
    (-0.1, 0.1, "zero-speed shock stuck at the boundary"),
    (-0.2, 0.1, "outflow: a boundary layer absorbs the datum"),
]


def main():
    system = make_system("burgers")
    model = BoundaryLayerModel(system)
    print(f"{'u+':>6} {'u_b':>6}  branch  k-wave   xi_k    note")
    for u_plus, u_b, note in CASES:
        sol = solve_boundary_riemann(system, model, [u_plus], [u_b])
        print(f"{u_plus:6.2f} {u_b:6.2f}  {sol.branch:6s} {sol.k_strength:7.3f} "
              f"{sol.trace.xi_k:7.3f}   {note}")


if __name__ == "__main__":
    main()
