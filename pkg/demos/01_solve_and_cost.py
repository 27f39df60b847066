"""Solve the Example 2 control problem mode by mode and compare its cost with the exact optimum."""

from mhfem import build_uniform_mesh, evaluate_cost, get_example, solve_all_modes

ex = get_example(2)
spec = ex.spec(10)
exact = ex.exact_cost()
print(f"Example 2: lambda = {ex.lam}, T = {ex.T:.4f}, N = {spec.N}, exact J = {exact:.6g}")
for n in (8, 16, 32, 64):
    sol = solve_all_modes(spec, build_uniform_mesh(n))
    J = evaluate_cost(spec, sol)
    its = sol.iterations
    print(f"  n = {n:3d}: J_h = {J:.6g} (ratio {J / exact:.5f}), MINRES iterations {min(its.values())}-{max(its.values())}")
