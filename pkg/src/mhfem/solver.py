"""Mode-by-mode multiharmonic FE solution of the reduced optimality system."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .assembly import Coefficient, FemMatrices, assemble
from .fourier import ModalField, mode_weight
from .mesh import Mesh
from .quadrature import collapsed_gauss_rule
from .sparse_linalg import BlockSystem, Preconditioner, minres_solve

__all__ = [
    "ProblemSpec",
    "ModeSolution",
    "MhSolution",
    "SolverError",
    "FRIEDRICHS_UNIT_SQUARE",
    "build_mode_system",
    "solve_mode",
    "solve_all_modes",
    "evaluate_cost",
    "misfit_sq",
]

FRIEDRICHS_UNIT_SQUARE = 1.0 / (math.sqrt(2.0) * math.pi)


class SolverError(RuntimeError):
    def __init__(self, message: str, k: Optional[int] = None, grid: Optional[int] = None):
        super().__init__(message)
        self.k = k
        self.grid = grid


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Data of the time-periodic optimal control problem on the unit square.

    ``desired_state`` provides per-mode coefficients, loads and the
    truncation remainder (see :mod:`mhfem.problems`).
    """

    desired_state: object
    lam: float
    T: float
    N: int
    sigma: Coefficient = 1.0
    nu: Coefficient = 1.0
    sigma_bounds: tuple = (1.0, 1.0)
    nu_bounds: tuple = (1.0, 1.0)
    C_F: float = FRIEDRICHS_UNIT_SQUARE

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("the cost parameter lambda must be positive")
        if not self.T > 0:
            raise ValueError("the period T must be positive")
        if self.N < 0:
            raise ValueError("the truncation index N must be nonnegative")
        for lo, hi in (self.sigma_bounds, self.nu_bounds):
            if not 0 < lo <= hi:
                raise ValueError("coefficient bounds must satisfy 0 < lower <= upper")

    @property
    def omega(self) -> float:
        return 2.0 * math.pi / self.T

    def with_N(self, N: int) -> "ProblemSpec":
        return ProblemSpec(
            self.desired_state, self.lam, self.T, N, self.sigma, self.nu,
            self.sigma_bounds, self.nu_bounds, self.C_F,
        )


@dataclass(frozen=True, eq=False)
class ModeSolution:
    k: int
    y: ModalField
    p: ModalField
    iterations: int
    converged: bool
    residual: float


@dataclass(eq=False)
class MhSolution:
    """State and adjoint coefficients (over all mesh nodes) for modes ``0..N``."""

    spec: ProblemSpec
    mesh: Mesh
    mats: FemMatrices
    modes: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return max(self.modes) if self.modes else -1

    def state(self, k: int) -> ModalField:
        return self.modes[k].y

    def adjoint(self, k: int) -> ModalField:
        return self.modes[k].p

    def control(self, k: int) -> ModalField:
        """``u_k = -p_k / λ``."""
        return self.modes[k].p.scale(-1.0 / self.spec.lam)

    @property
    def converged(self) -> bool:
        return all(m.converged for m in self.modes.values())

    @property
    def iterations(self) -> dict:
        return {k: m.iterations for k, m in sorted(self.modes.items())}


def build_mode_system(spec: ProblemSpec, mats: FemMatrices, k: int, loads: tuple) -> BlockSystem:
    """Saddle-point system of mode ``k`` with desired-state loads ``(cos, sin)``."""
    if k < 0:
        raise ValueError("mode index must be nonnegative")
    M, Ms, K = mats.M, mats.M_sigma, mats.K_nu
    il = 1.0 / spec.lam
    n = M.shape[0]
    if k == 0:
        rhs = np.concatenate([np.asarray(loads[0], dtype=float), np.zeros(n)])
        return BlockSystem(((M, -K), (-K, -il * M)), rhs, 0)
    kw = k * spec.omega
    blocks = (
        (M, None, -K, kw * Ms),
        (None, M, -kw * Ms, -K),
        (-K, -kw * Ms, -il * M, None),
        (kw * Ms, -K, None, -il * M),
    )
    rhs = np.concatenate([np.asarray(loads[0], float), np.asarray(loads[1], float), np.zeros(2 * n)])
    return BlockSystem(blocks, rhs, k)


def _to_nodes(mesh: Mesh, v: np.ndarray) -> np.ndarray:
    full = np.zeros(mesh.n_nodes)
    full[mesh.interior_nodes] = v
    return full


def solve_mode(spec: ProblemSpec, mesh: Mesh, mats: FemMatrices, k: int, tol: float = 1e-10,
               max_iter: int = 2000) -> ModeSolution:
    loads = spec.desired_state.load(mesh, k)
    system = build_mode_system(spec, mats, k, loads)
    pc = Preconditioner.for_mode(mats.M, mats.M_sigma, mats.K_nu, spec.lam, k, spec.omega)
    res = minres_solve(system, pc, tol=tol, max_iter=max_iter)
    n = mats.n
    parts = [_to_nodes(mesh, res.x[i * n:(i + 1) * n]) for i in range(system.n_blocks)]
    if k == 0:
        y, p = ModalField(0, parts[0]), ModalField(0, parts[1])
    else:
        y, p = ModalField(k, parts[0], parts[1]), ModalField(k, parts[2], parts[3])
    return ModeSolution(k, y, p, res.iterations, res.converged, res.relative_residual)


def solve_all_modes(spec: ProblemSpec, mesh: Mesh, tol: float = 1e-10, workers: int = 1,
                    mats: Optional[FemMatrices] = None, modes=None, strict: bool = True) -> MhSolution:
    """Solve every mode ``0..N`` independently.

    With ``strict`` a non-converged mode raises :class:`SolverError`;
    otherwise it is kept and flagged in the result.
    """
    mats = assemble(mesh, spec.sigma, spec.nu) if mats is None else mats
    ks = list(range(spec.N + 1)) if modes is None else list(modes)

    def one(k):
        return solve_mode(spec, mesh, mats, k, tol)

    if workers > 1 and len(ks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, ks))
    else:
        results = [one(k) for k in ks]
    sol = MhSolution(spec, mesh, mats)
    for r in sorted(results, key=lambda r: r.k):
        if strict and not r.converged:
            raise SolverError(
                f"MINRES did not converge for mode k={r.k} on the {mesh.n_cells_per_side}-grid",
                k=r.k, grid=mesh.n_cells_per_side,
            )
        sol.modes[r.k] = r
    return sol


def misfit_sq(mesh: Mesh, y: ModalField, desired_state, rule=None) -> float:
    """``‖y_k - y_d,k‖²_Ω`` with the desired state sampled exactly by quadrature."""
    rule = collapsed_gauss_rule(5) if rule is None else rule
    area = mesh.areas
    yd = desired_state.quad_values(mesh, rule, y.k)
    total = 0.0
    for v, d in zip(y.parts, yd):
        vals = v[mesh.triangles] @ rule.bary.T - d
        total += float(np.einsum("tq,q,t->", vals * vals, rule.weights, area))
    return total


def mode_cost(sol: MhSolution, k: int) -> float:
    """``J_k = ½‖y_k - y_d,k‖² + (λ/2)‖u_k‖²``."""
    spec = sol.spec
    u = sol.control(k)
    M = sol.mats.M
    idx = sol.mesh.interior_nodes
    u_sq = sum(float(v[idx] @ (M @ v[idx])) for v in u.parts)
    return 0.5 * misfit_sq(sol.mesh, sol.state(k), spec.desired_state) + 0.5 * spec.lam * u_sq


def evaluate_cost(spec: ProblemSpec, sol: MhSolution) -> float:
    """``J = T J_0 + (T/2) sum_k J_k + ½ E_N`` for the truncated solution."""
    total = sum(mode_weight(k, spec.T) * mode_cost(sol, k) for k in sol.modes)
    return total + 0.5 * spec.desired_state.remainder(sol.N)
