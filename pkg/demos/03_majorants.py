"""Per-mode majorants, cost majorants and efficiency indices of Example 1."""

from mhfem.report import evaluate_grid

print(" n   k       M+   I_eff^M        J+   I_eff^J")
for n in (16, 32, 64):
    rows, _ = evaluate_grid(1, n, N=3)
    for r in rows:
        print(f"{n:3d} {r.k:3d} {r.majorant_semi:8.4g} {r.ieff_m:8.4g} {r.j_oplus:10.5g} {r.ieff_j:8.4f}")
