"""The five branches of the critical-point classification.

For each sign pattern of the weights (lam1 >= 0, lam2 arbitrary), scans the
closed-form residual -4*lam1/rho - 2*lam2 along the sphere family, reports
the plane residual -2*lam2, and prints the branch verdict with its evidence.
"""

from helfrich.classify import classify_case, plane_residual, radius_scan
from helfrich.energy import EnergyParams

CASES = [
    (1.0, -1.0, "area penalized, volume rewarded"),
    (1.0, 0.0, "area penalized only"),
    (1.0, 0.5, "area and volume both penalized"),
    (0.0, 0.0, "pure bending"),
    (0.0, 0.3, "volume penalized only"),
]

for lam1, lam2, blurb in CASES:
    params = EnergyParams(0.0, lam1, lam2)
    table = radius_scan(params, 0.1, 50.0, 400)
    verdict = classify_case(params, scan=table)
    print(f"--- (lam1, lam2) = ({lam1}, {lam2}): {blurb}")
    print(f"    branch     {verdict.branch}")
    print(f"    predicted  {verdict.predicted}")
    roots = table.roots()
    if roots:
        print(f"    sphere-family root(s) at rho = {[round(r, 12) for r in roots]}")
    else:
        print(f"    no sphere-family root; min |residual| over the scan = "
              f"{table.min_abs_residual:.4f}")
    print(f"    plane residual = {plane_residual(params):+.4f}")
    print(f"    evidence consistent: {verdict.consistent}")
    print()

print("scaling check: weights (s^2 lam1, s^3 lam2) move the critical radius "
      "by 1/s")
from helfrich.classify import critical_sphere_radius
for s in (1.0, 2.0, 4.0):
    r = critical_sphere_radius(EnergyParams(0.0, s**2 * 1.0, -s**3 * 1.0))
    print(f"  s = {s}: critical radius {r:.6f}")
