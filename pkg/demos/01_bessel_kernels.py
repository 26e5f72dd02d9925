"""The modified-Bessel substrate and the radial Green's-function kernels.

Every nonzero Fourier mode of the solver is built from the pair
K_a(|k| r), I_a(|k| r) weighted by r^{nu/2}.  This script shows the three
things the substrate has to get right:

  1. values and derivative recurrences (checked through the Wronskian),
  2. overflow-safe scaling: the kernels only ever meet in products whose
     exponentials cancel, so |k| r in the thousands is routine,
  3. the homogeneous radial ODE each kernel pair solves.

Run:  python demos/01_bessel_kernels.py
"""

import numpy as np

from excyl import (
    bessel_i,
    bessel_k,
    kernel_I,
    kernel_I_derivs,
    kernel_K,
    kernel_K_derivs,
    wronskian_check,
)

print("values at x = 2:")
print(f"  I_0(2) = {bessel_i(0.0, 2.0).value():.15f}")
print(f"  K_0(2) = {bessel_k(0.0, 2.0).value():.15f}")
print(f"  I_1(2) = {bessel_i(1.0, 2.0).value():.15f}")
print(f"  K_1(2) = {bessel_k(1.0, 2.0).value():.15f}")

xs = np.array([0.5, 2.0, 10.0, 50.0, 400.0])
defect = wronskian_check(xs) * xs + 1.0
print("\nWronskian identity K_1' I_1 - K_1 I_1' = -1/x:")
for x, d in zip(xs, defect):
    print(f"  x = {x:7.1f}   defect = {d:+.2e}")

print("\nscaled kernels at |k| r far beyond double-precision range:")
k, nu = 40, -1.0
r = np.array([50.0, 100.0, 150.0])
prod = kernel_K(k, nu, r) * kernel_I(k, nu, r)
asymptote = r ** nu / (2 * k * r)
print("  K_k * I_k ~ r^nu / (2 |k| r):")
for ri, got, want in zip(r, prod.value(), asymptote):
    print(f"  r = {ri:6.1f}   product = {got:.6e}   asymptote = {want:.6e}")

print("\nhomogeneous ODE residual of the swirl kernel pair (k=3, nu=-1.8):")
k, nu = 3, -1.8
r = np.geomspace(1.0, 80.0, 400)
for name, derivs in (("decaying", kernel_K_derivs), ("growing", kernel_I_derivs)):
    g0, g1, g2 = derivs(k, nu, r, "swirl")
    res = g2 + ((1 - nu) / r) * g1 - ((1 + nu) / r ** 2 + k * k) * g0
    rel = np.exp(res.log_abs() - g2.log_abs())
    print(f"  {name:8s} kernel: max relative residual {np.max(rel):.2e}")
