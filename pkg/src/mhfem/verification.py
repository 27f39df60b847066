"""Exact and reference errors used as denominators of efficiency indices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import assemble_full
from .flux import p1_gradients
from .fourier import mode_weight
from .mesh import Mesh
from .problems import ExampleDefinition, prolongate
from .quadrature import collapsed_gauss_rule, physical_points
from .solver import MhSolution

__all__ = [
    "ModeError",
    "exact_mode_error",
    "reference_mode_error",
    "error_denominator",
    "overall_exact_error_sq",
]


@dataclass(frozen=True)
class ModeError:
    """Squared errors of one mode summed over state and adjoint, cosine and sine."""

    k: int
    grad_sq: float
    l2_sq: float

    def denominator(self, omega: float, kind: str = "h1semi") -> float:
        """Error seminorm of the mode: gradient part, optionally with ``kω‖e‖²``."""
        if kind == "h1semi":
            return float(np.sqrt(self.grad_sq))
        if kind == "weighted":
            return float(np.sqrt(self.grad_sq + self.k * omega * self.l2_sq))
        raise ValueError("denominator must be 'h1semi' or 'weighted'")


def _profile_errors(mesh: Mesh, profile, scalars, fields) -> tuple:
    rule = collapsed_gauss_rule(5)
    pts = physical_points(mesh, rule)
    phi = profile(pts[..., 0], pts[..., 1])
    dphi = profile.gradient(pts[..., 0], pts[..., 1])
    w = np.einsum("q,t->tq", rule.weights, mesh.areas)
    grad_sq = l2_sq = 0.0
    for a, v in zip(scalars, fields):
        e = a * phi - v[mesh.triangles] @ rule.bary.T
        ge = a * dphi - p1_gradients(mesh, v)[:, None, :]
        l2_sq += float(np.sum(w * e * e))
        grad_sq += float(np.sum(w * (ge * ge).sum(axis=2)))
    return grad_sq, l2_sq


def exact_mode_error(example: ExampleDefinition, sol: MhSolution, k: int) -> ModeError:
    """Error of mode ``k`` against the closed-form modal solution, by high-order quadrature."""
    yc, ys, pc, ps = example.exact_modes([k])[0]
    y, p = sol.state(k), sol.adjoint(k)
    if k == 0:
        scalars, fields = (yc, pc), (y.cos, p.cos)
    else:
        scalars, fields = (yc, ys, pc, ps), (y.cos, y.sin, p.cos, p.sin)
    g, l2 = _profile_errors(sol.mesh, example.exact.profile, scalars, fields)
    return ModeError(k, g, l2)


def reference_mode_error(sol: MhSolution, ref: MhSolution, k: int) -> ModeError:
    """Error of mode ``k`` against a solution on a nested finer mesh."""
    fine = ref.mesh
    M, _, K = assemble_full(fine)
    pairs = list(zip(sol.state(k).parts, ref.state(k).parts))
    pairs += list(zip(sol.adjoint(k).parts, ref.adjoint(k).parts))
    grad_sq = l2_sq = 0.0
    for coarse_v, fine_v in pairs:
        e = fine_v - prolongate(sol.mesh, fine, coarse_v)
        grad_sq += float(e @ (K @ e))
        l2_sq += float(e @ (M @ e))
    return ModeError(k, grad_sq, l2_sq)


def error_denominator(err: ModeError, omega: float, kind: str = "h1semi") -> float:
    return err.denominator(omega, kind)


def overall_exact_error_sq(example: ExampleDefinition, sol: MhSolution, full: bool = False) -> float:
    """``|e|²_{1,1/2}`` (or ``‖e‖²_{1,1/2}`` with ``full``) including all modes beyond ``N``.

    Solved modes use :func:`exact_mode_error`; for the missing modes the
    error equals the exact mode itself.
    """
    T, omega = example.T, example.omega
    total = 0.0
    for k in sorted(sol.modes):
        e = exact_mode_error(example, sol, k)
        total += mode_weight(k, T) * (e.grad_sq + k * omega * e.l2_sq + (e.l2_sq if full else 0.0))
    total += example.exact_seminorm_tail_sq(sol.N)
    if full:
        total += example.exact_l2_tail_sq(sol.N)
    return total
