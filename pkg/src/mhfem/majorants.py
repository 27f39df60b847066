"""Functional a posteriori majorants for the multiharmonic optimality system.

For every mode the four residuals

    R1 = σ ∂ₜη + λ⁻¹ζ - div τ,        R2 = τ - ν∇η,
    R3 = σ ∂ₜζ + η - div ρ - y_d,     R4 = ρ + ν∇ζ,

are evaluated on the mesh with ``τ ≈ ν∇η`` and ``ρ ≈ -ν∇ζ`` reconstructed in
RT0. Mode ``k`` contributes its squared norms with the weight ``T`` (k = 0)
or ``T/2``; the data tail beyond the truncation index enters through ``E_N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .flux import p1_gradients, reconstruct_rt0
from .fourier import ModalField, mode_weight
from .quadrature import collapsed_gauss_rule, midedge_rule
from .solver import MhSolution, ProblemSpec, misfit_sq

__all__ = [
    "StabilityConstants",
    "ModalResiduals",
    "YoungParameters",
    "SeminormMajorant",
    "CostMajorant",
    "modal_residuals",
    "reconstruct_fluxes",
    "majorant_seminorm",
    "majorant_full_norm",
    "per_mode_majorant",
    "optimize_young",
    "young_value",
    "cost_majorant",
    "efficiency_index",
    "quadratic_form_majorant_sq",
    "minimize_quadratic_form",
]


@dataclass(frozen=True)
class StabilityConstants:
    """Inf-sup constants of the optimality system and the Friedrichs constant."""

    mu1: float
    mu2: float
    mu1_tilde: float
    mu2_tilde: float
    mu1_under: float
    C_F: float

    def __post_init__(self):
        for name in ("mu1", "mu2", "mu1_tilde", "mu2_tilde", "mu1_under", "C_F"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_spec(cls, spec: ProblemSpec) -> "StabilityConstants":
        lam = spec.lam
        s_lo, s_hi = spec.sigma_bounds
        n_lo, n_hi = spec.nu_bounds
        lo = min(n_lo, s_lo)
        mu1 = (
            min(1.0 / math.sqrt(lam), n_lo, s_lo)
            * min(math.sqrt(lam), 1.0 / math.sqrt(lam))
            / math.sqrt(1.0 + 2.0 * max(lam, 1.0 / lam))
        )
        mu2 = max(1.0, 1.0 / lam, n_hi, s_hi)
        return cls(
            mu1=mu1,
            mu2=mu2,
            mu1_tilde=lo * min(lam, 1.0 / lam) / math.sqrt(2.0),
            mu2_tilde=mu2 * max(1.0, spec.C_F**2 + 1.0),
            mu1_under=lo / math.sqrt(2.0),
            C_F=spec.C_F,
        )


@dataclass(frozen=True)
class ModalResiduals:
    """Squared ``Ω``-norms of R1..R4 per mode (cosine and sine parts summed).

    ``r1[i]`` belongs to mode ``ks[i]``; ``T`` provides the modal weights.
    """

    ks: tuple
    r1: np.ndarray
    r2: np.ndarray
    r3: np.ndarray
    r4: np.ndarray
    T: float

    def __post_init__(self):
        for name in ("r1", "r2", "r3", "r4"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != (len(self.ks),):
                raise ValueError("one residual value per mode is required")
            if np.any(a < 0):
                raise ValueError("squared residual norms must be nonnegative")
            object.__setattr__(self, name, a)
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))

    def index(self, k: int) -> int:
        return self.ks.index(k)

    @property
    def weights(self) -> np.ndarray:
        return np.array([mode_weight(k, self.T) for k in self.ks])

    def weighted_sums(self) -> np.ndarray:
        """``(Σ w_k ‖R_j,k‖²)_{j=1..4}``."""
        w = self.weights
        return np.array([w @ self.r1, w @ self.r2, w @ self.r3, w @ self.r4])

    def scaled(self, s: float) -> "ModalResiduals":
        """Residuals with every norm multiplied by ``s``."""
        s2 = s * s
        return ModalResiduals(self.ks, s2 * self.r1, s2 * self.r2, s2 * self.r3, s2 * self.r4, self.T)


@dataclass(frozen=True)
class YoungParameters:
    """Optimized Young parameters per mode; the tail parameter is a limit value."""

    alpha: dict
    beta: dict
    alpha_tail: float = 0.0

    def __post_init__(self):
        for d in (self.alpha, self.beta):
            if any(not v > 0 for v in d.values()):
                raise ValueError("Young parameters must be positive")


def reconstruct_fluxes(sol: MhSolution, k: int) -> tuple:
    """RT0 reconstructions ``τ_k ≈ ν∇y_k`` and ``ρ_k ≈ -ν∇p_k``, one field per part."""
    nu = sol.mats.nu_cells
    tau = tuple(reconstruct_rt0(sol.mesh, v, nu) for v in sol.state(k).parts)
    rho = tuple(reconstruct_rt0(sol.mesh, -v, nu) for v in sol.adjoint(k).parts)
    return tau, rho


def _p1_at(mesh, v, rule) -> np.ndarray:
    return v[mesh.triangles] @ rule.bary.T


def _sq_norm(mesh, values, rule) -> float:
    """``∫ |v|²`` for values (n_tri, nq) or (n_tri, nq, 2) at the rule's points."""
    v2 = values * values
    if v2.ndim == 3:
        v2 = v2.sum(axis=2)
    return float(np.einsum("tq,q,t->", v2, rule.weights, mesh.areas))


def _mode_residuals(mesh, spec, sigma, nu, k, eta: ModalField, zeta: ModalField, tau, rho,
                    desired_state) -> tuple:
    mid = midedge_rule()
    fine = collapsed_gauss_rule(5)
    kw = k * spec.omega
    il = 1.0 / spec.lam
    if k == 0:
        rot_eta, rot_zeta = (np.zeros(mesh.n_nodes),), (np.zeros(mesh.n_nodes),)
    else:
        # cosine part of ∂ₜv is kω v^s, sine part is -kω v^c
        rot_eta = (eta.sin, -eta.cos)
        rot_zeta = (zeta.sin, -zeta.cos)
    yd = desired_state.quad_values(mesh, fine, k)
    r1 = r2 = r3 = r4 = 0.0
    for i in range(len(eta.parts)):
        div_tau = tau[i].divergence()[:, None]
        div_rho = rho[i].divergence()[:, None]
        v1 = sigma[:, None] * kw * _p1_at(mesh, rot_eta[i], mid) + il * _p1_at(mesh, zeta.parts[i], mid) - div_tau
        r1 += _sq_norm(mesh, v1, mid)
        g_eta = nu[:, None] * p1_gradients(mesh, eta.parts[i])
        r2 += _sq_norm(mesh, tau[i].evaluate(mid) - g_eta[:, None, :], mid)
        v3 = (
            sigma[:, None] * kw * _p1_at(mesh, rot_zeta[i], fine)
            + _p1_at(mesh, eta.parts[i], fine)
            - div_rho
            - yd[i]
        )
        r3 += _sq_norm(mesh, v3, fine)
        g_zeta = nu[:, None] * p1_gradients(mesh, zeta.parts[i])
        r4 += _sq_norm(mesh, rho[i].evaluate(mid) + g_zeta[:, None, :], mid)
    return r1, r2, r3, r4


def modal_residuals(sol: MhSolution, ks=None, fluxes: Optional[dict] = None) -> ModalResiduals:
    """Residual norms of the solution's modes.

    ``fluxes`` optionally maps ``k`` to ``(tau_parts, rho_parts)``; by default
    the fluxes are reconstructed from the solution itself.
    """
    spec = sol.spec
    mesh = sol.mesh
    ks = sorted(sol.modes) if ks is None else list(ks)
    out = np.zeros((4, len(ks)))
    for j, k in enumerate(ks):
        tau, rho = reconstruct_fluxes(sol, k) if fluxes is None or k not in fluxes else fluxes[k]
        for f in (*tau, *rho):
            if f.mesh is not mesh and f.mesh.n_nodes != mesh.n_nodes:
                raise ValueError("flux and solution live on different meshes")
        out[:, j] = _mode_residuals(
            mesh, spec, sol.mats.sigma_cells, sol.mats.nu_cells, k,
            sol.state(k), sol.adjoint(k), tau, rho, spec.desired_state,
        )
    return ModalResiduals(tuple(ks), *out, T=spec.T)


@dataclass(frozen=True)
class SeminormMajorant:
    """Total ``M⊕`` and the four square-rooted weighted sums it is built from."""

    value: float
    A: tuple


def majorant_seminorm(res: ModalResiduals, consts: StabilityConstants, E_N: float = 0.0) -> SeminormMajorant:
    """``(1/μ̃₁)(C_F A₁ + A₂ + C_F A₃ + A₄)``, ``A_j`` the root of the weighted sum of ``‖R_j‖²``.

    The data tail ``E_N`` belongs to ``A₃``.
    """
    if E_N < 0:
        raise ValueError("the remainder term is nonnegative")
    s = res.weighted_sums()
    s[2] += E_N
    A = tuple(float(math.sqrt(v)) for v in s)
    c = consts.C_F
    value = (c * A[0] + A[1] + c * A[2] + A[3]) / consts.mu1_tilde
    return SeminormMajorant(value, A)


def majorant_full_norm(res: ModalResiduals, consts: StabilityConstants, E_N: float = 0.0) -> float:
    """``(1/μ₁)(Σ_k w_k Σ_j ‖R_j,k‖² + E_N)^{1/2}``."""
    if E_N < 0:
        raise ValueError("the remainder term is nonnegative")
    return math.sqrt(float(res.weighted_sums().sum()) + E_N) / consts.mu1


def per_mode_majorant(res: ModalResiduals, k: int, consts: StabilityConstants,
                      scaling: str = "table") -> float:
    """Majorant of mode ``k`` alone, without time weight.

    ``scaling="table"`` uses the factor ``√2`` in front of
    ``C_F(‖R1‖ + ‖R3‖) + ‖R2‖ + ‖R4‖``; ``scaling="theory"`` uses ``1/μ̃₁``.
    """
    i = res.index(k)
    r = np.sqrt([res.r1[i], res.r2[i], res.r3[i], res.r4[i]])
    core = consts.C_F * (r[0] + r[2]) + r[1] + r[3]
    if scaling == "table":
        return math.sqrt(2.0) * core
    if scaling == "theory":
        return core / consts.mu1_tilde
    raise ValueError("scaling must be 'table' or 'theory'")


def young_value(A: float, X: float, Y: float, alpha: float, beta: float) -> float:
    """``(1+α)A + (1+α)/α · (1+β)(X + Y/β)`` for positive ``α, β``."""
    return (1.0 + alpha) * A + (1.0 + alpha) / alpha * (1.0 + beta) * (X + Y / beta)


def optimize_young(A: float, X: float, Y: float) -> tuple:
    """Minimize :func:`young_value` over ``α, β > 0`` in closed form.

    Returns ``(α*, β*, value)``. The β-minimum of ``(1+β)(X + Y/β)`` is ``S = (√X + √Y)²`` at
    ``β* = √(Y/X)`` and the α-minimum of ``(1+α)A + (1+α)S/α`` is
    ``(√A + √S)²`` at ``α* = √(S/A)``. Degenerate inputs return the limits
    (``inf`` or ``0`` for the parameter that escapes).
    """
    if min(A, X, Y) < 0:
        raise ValueError("A, X and Y must be nonnegative")
    if X > 0 and Y > 0:
        beta = math.sqrt(Y / X)
    elif Y > 0:  # R2 = 0: S -> Y as β -> ∞
        beta = math.inf
    else:  # R1 = 0: S -> X as β -> 0
        beta = 0.0
    S = (math.sqrt(X) + math.sqrt(Y)) ** 2
    if A > 0 and S > 0:
        alpha = math.sqrt(S / A)
    elif A > 0:  # exact residuals: α -> 0
        alpha = 0.0
    else:  # exact misfit term: α -> ∞
        alpha = math.inf
    value = (math.sqrt(A) + math.sqrt(S)) ** 2
    return alpha, beta, value


@dataclass
class CostMajorant:
    """``J⊕`` with its per-mode parts (without time weight) and parameters."""

    value: float
    per_mode: dict
    young: YoungParameters
    remainder: float
    parts: dict = field(default_factory=dict)


def cost_majorant(sol: MhSolution, consts: Optional[StabilityConstants] = None,
                  res: Optional[ModalResiduals] = None, E_N: Optional[float] = None) -> CostMajorant:
    """Guaranteed upper bound of the cost at the exact optimum.

    Mode ``k`` contributes ``(1+α)A + (1+α)/α (1+β)(X + Y/β) + (λ/2)‖u_k‖²``
    with ``A = ½‖y_k - y_d,k‖²``, ``X = C_F²‖R2‖²/(2μ̲₁²)`` and
    ``Y = C_F⁴‖R1‖²/(2μ̲₁²)``. Here ``R1 = σ∂ₜy + div τ + u`` equals the
    negative of the majorant residual ``R1`` since ``u = -p/λ``, so their
    norms coincide. The tail enters as ``½E_N`` (tail parameter at its limit 0).
    """
    spec = sol.spec
    consts = StabilityConstants.from_spec(spec) if consts is None else consts
    res = modal_residuals(sol) if res is None else res
    E_N = spec.desired_state.remainder(sol.N) if E_N is None else E_N
    c2 = consts.C_F**2
    mu2 = consts.mu1_under**2
    M = sol.mats.M
    idx = sol.mesh.interior_nodes
    per_mode, alphas, betas, parts = {}, {}, {}, {}
    total = 0.0
    for k in sorted(sol.modes):
        i = res.index(k)
        A = 0.5 * misfit_sq(sol.mesh, sol.state(k), spec.desired_state)
        X = c2 * res.r2[i] / (2.0 * mu2)
        Y = c2 * c2 * res.r1[i] / (2.0 * mu2)
        alpha, beta, val = optimize_young(A, X, Y)
        u_sq = sum(float(v[idx] @ (M @ v[idx])) for v in sol.control(k).parts)
        jk = val + 0.5 * spec.lam * u_sq
        per_mode[k] = jk
        parts[k] = {"A": A, "X": X, "Y": Y, "control": 0.5 * spec.lam * u_sq}
        # keep the record positive: limits 0/inf are stored as the nearest floats
        alphas[k] = min(max(alpha, np.finfo(float).tiny), np.finfo(float).max)
        betas[k] = min(max(beta, np.finfo(float).tiny), np.finfo(float).max)
        total += mode_weight(k, spec.T) * jk
    total += 0.5 * E_N
    return CostMajorant(total, per_mode, YoungParameters(alphas, betas, 0.0), E_N, parts)


def efficiency_index(estimate: float, reference: float) -> Optional[float]:
    """``estimate / reference``, or ``None`` when the reference vanishes."""
    if not math.isfinite(reference) or reference <= 0.0:
        return None
    return estimate / reference


def quadratic_form_majorant_sq(norms, consts: StabilityConstants, alpha: float, beta: float,
                               gamma: float) -> float:
    """Young-split square of the seminorm majorant for residual norms ``(‖R1‖, .., ‖R4‖)``."""
    r1, r2, r3, r4 = (float(v) for v in norms)
    c2 = consts.C_F**2
    a1 = 1.0 + alpha
    val = (
        c2 * a1 * (1.0 + beta) * r1 * r1
        + a1 * (1.0 + beta) / beta * r2 * r2
        + c2 * a1 * (1.0 + gamma) / alpha * r3 * r3
        + a1 * (1.0 + gamma) / (alpha * gamma) * r4 * r4
    )
    return val / consts.mu1_tilde**2


def minimize_quadratic_form(norms, consts: StabilityConstants) -> tuple:
    """Closed-form ``(α, β, γ)`` minimizing :func:`quadratic_form_majorant_sq`.

    All norms must be positive. The minimum equals the square of the plain
    sum majorant ``(C_F‖R1‖ + ‖R2‖ + C_F‖R3‖ + ‖R4‖)/μ̃₁``.
    """
    r1, r2, r3, r4 = (float(v) for v in norms)
    if min(r1, r2, r3, r4) <= 0:
        raise ValueError("closed-form parameters need positive residual norms")
    a, b = consts.C_F * r1, r2
    c, d = consts.C_F * r3, r4
    beta = b / a
    gamma = d / c
    alpha = (c + d) / (a + b)
    return alpha, beta, gamma
