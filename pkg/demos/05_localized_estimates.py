"""Localized integral report behind the curvature-gap argument.

A quintic cutoff supported on a ball localizes the integrals that control
surface geometry through the Euler-Lagrange residual.  The absolute
constants of the underlying inequalities are not numeric, so the report
tabulates the computable terms without emitting a verdict; the interesting
qualitative facts are visible anyway: the residual term vanishes on the
critical sphere and the gap quantity of the catenoid saturates below 8*pi.
"""

import numpy as np

import helfrich as hf
from helfrich.analytic import estimate_report
from helfrich.energy import EnergyParams, localized_gap


def show(rep):
    print(f"surface {rep.surface}, cutoff ball radius {rep.radius}, "
          f"gradient bound c_gamma = {rep.c_gamma:.4f}")
    for name, val in rep.terms.items():
        print(f"  {name:26s} {val: .6e}   (+/- {rep.error_estimates[name]:.1e})")
    print()


print("=== critical sphere: the residual term is identically zero ===")
show(estimate_report(hf.sphere(2.0), EnergyParams(0.0, 1.0, -1.0),
                     cutoff=((0.0, 0.0, 0.0), 10.0)))

print("=== plane with a volume weight: constant residual -2*lam2 ===")
show(estimate_report(hf.plane_patch(), EnergyParams(0.0, 0.0, 0.5),
                     cutoff=((0.5, 0.5, 0.0), 0.4)))

print("=== catenoid: curvature concentrates at the neck ===")
show(estimate_report(hf.catenoid(1.0, 5.0), EnergyParams(0.0, 1.0, 0.0),
                     cutoff=((0.0, 0.0, 0.0), 10.0)))

print("=== localized gap grows monotonically toward 8*pi ===")
for radius in (1.5, 2.0, 3.0, 5.0, 10.0, 40.0, 200.0):
    gap = localized_gap(hf.catenoid(1.0, 5.0), (0, 0, 0), radius)
    print(f"  ball radius {radius:6.1f}: gap {gap:.6f}")
print(f"  full catenoid:      gap {8 * np.pi * np.tanh(5.0):.6f} "
      f"(8*pi = {8 * np.pi:.6f})")
