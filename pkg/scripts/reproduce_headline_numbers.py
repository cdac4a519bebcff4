"""Print the fixed point, sign-change and critical-coupling numbers."""

import math
import time

from rgflow.fixedpoint import SeedGrid, XiBranch, find_fixed_points, scan_critical_xi, scan_neumann_sign_change
from rgflow.models import CONFORMAL_XI, ModelSpec


def main():
    t0 = time.perf_counter()
    report = find_fixed_points(ModelSpec.ads(), SeedGrid((-0.2, 2.0), (0.0, 2.0), n=8))
    elapsed = time.perf_counter() - t0
    for p in report.points:
        m2, lam = p.state.as_tuple()
        eig = ", ".join(f"{e.real:+.6f}" for e in p.eigenvalues)
        print(f"AdS xi=1/6 fixed point: m2*={m2:.9f}  m*={math.sqrt(m2):.6f}  lambda*={lam:.9f}")
        print(f"  eigenvalues (k d/dk): {eig}  -> {p.classification.value}  [{elapsed:.3f} s]")
    for line in report.lines:
        print(f"  plus the line lambda=0 for m2 > {line.m2_min:g}")

    z = scan_neumann_sign_change()
    print(f"Neumann minimal, massless: beta_lambda changes sign at z*={z:.7f}")

    branch = XiBranch()
    xi_bar = scan_critical_xi(branch=branch)
    print(f"critical curvature coupling: xi_bar={xi_bar:.6f}")
    for xi in (0.0, xi_bar, CONFORMAL_XI):
        s = branch.at(xi)
        gap = s.m2_tilde + 0.25
        side = "at BF bound" if abs(gap) < 1e-3 else ("admissible" if gap > 0 else "below BF bound")
        print(f"  xi={xi:.6f}: m2*={s.m2_tilde:+.6f}  lambda*={s.lambda_tilde:.6f}  ({side})")


if __name__ == "__main__":
    main()
