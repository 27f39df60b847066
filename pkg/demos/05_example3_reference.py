"""Example 3 has no closed-form solution; measure against a solution on a refined mesh."""

from mhfem.report import evaluate_grid

rows, _ = evaluate_grid(3, 32, N=7, ref_factor=2, overall=True)
for r in rows:
    ieff = "" if r.ieff_j is None else f"{r.ieff_j:.4f}"
    print(f"k = {r.k!s:>3}: J+ = {r.j_oplus:.5g}, reference J = {r.extras['j_reference']:.5g}, I_eff^J = {ieff}")
