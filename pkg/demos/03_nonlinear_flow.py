"""Constructing a nonlinear flow by fixed-point iteration.

Boundary data: the swirl on the cylinder wall is perturbed by a single
Fourier mode of amplitude 1e-3 on top of the rotation/sink background
(nu, mu) = (-1, 1).  The iteration re-solves every linear mode with the
quadratic terms of the previous iterate as forcing; distances between
iterates contract geometrically, and the converged field is audited in
physical space by an independent finite-difference/spectral residual.

Run:  python demos/03_nonlinear_flow.py
"""

import numpy as np

from excyl import BoundaryData, ForcingData, RadialGrid, picard_solve, synthesize
from excyl.residuals import attach_residual_report

grid = RadialGrid.graded(1024, 100.0, 2.0)
nu, mu = -1.0, 1.0
boundary = BoundaryData(g_theta={1: 1e-3})

bundle = picard_solve(grid, nu, mu, k_max=8, forcing=ForcingData(),
                      boundary=boundary)
print(f"tau = {bundle.tau.tau}")
print(f"converged in {bundle.iterations} iterations; "
      f"contraction estimate {bundle.contraction_estimate:.2e}")
print("iterate distances:", ", ".join(f"{d:.3e}" for d in bundle.diff_history))
print(f"solution norm {bundle.norms['B_tau']:.4e} "
      f"for data norm {bundle.norms['V']:.4e} "
      f"(observed stability constant {bundle.c_emp:.2f})")
print(f"zero-mode swirl tail coefficient sigma = {bundle.sigma:.3e}")

rep = attach_residual_report(bundle)
print("\nindependent residual audit (4th-order FD in r, spectral in z):")
print(rep.as_text().split("decay fit")[0].rstrip())

u_r, u_th, u_z = synthesize(bundle.v, 2.0, np.linspace(0, 2 * np.pi, 5),
                            nu=nu, mu=mu, include_background=True)
print("\nfull velocity on the circle r = 2:")
for j, z in enumerate(np.linspace(0, 2 * np.pi, 5)):
    print(f"  z = {z:5.2f}   u = ({u_r[j]:+.6f}, {u_th[j]:+.6f}, {u_z[j]:+.6e})")
