"""Reconstruct an H(div) flux from a discrete state and inspect its residuals."""

import numpy as np

from mhfem import build_uniform_mesh, get_example, solve_all_modes
from mhfem.flux import normal_jumps, p1_gradients
from mhfem.majorants import modal_residuals, reconstruct_fluxes
from mhfem.quadrature import midedge_rule

ex = get_example(1)
for n in (16, 32, 64):
    sol = solve_all_modes(ex.spec(1), build_uniform_mesh(n))
    tau, _ = reconstruct_fluxes(sol, 1)
    jumps = max(np.abs(normal_jumps(t)).max() for t in tau)
    broken = p1_gradients(sol.mesh, sol.state(1).cos)
    gap = np.abs(tau[0].evaluate(midedge_rule()) - broken[:, None, :]).max()
    res = modal_residuals(sol, ks=[1])
    r = np.sqrt([res.r1[0], res.r2[0], res.r3[0], res.r4[0]])
    print(f"n = {n:3d}: max normal jump {jumps:.1e}, max |tau - grad y_h| {gap:.3g}, "
          f"|R1..R4| = {', '.join(f'{v:.4g}' for v in r)}")
