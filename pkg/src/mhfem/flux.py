"""Lowest-order Raviart-Thomas fields built from P1 gradients.

The degree of freedom of edge ``e`` is the total flux ``∫_e τ·n_e ds``
through ``e`` in the direction of its global normal. On a triangle ``T``
with vertices ``P_i`` (edge ``i`` opposite ``P_i``, outward sign ``s_i``),

    τ(x) = Σ_i s_i F_i (x - P_i) / (2|T|),      div τ = Σ_i s_i F_i / |T|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh
from .quadrature import TriangleRule, midedge_rule, physical_points

__all__ = [
    "Rt0Field",
    "reconstruct_rt0",
    "rt0_divergence",
    "p1_gradients",
    "rt0_interpolate",
    "normal_jumps",
]


@dataclass(frozen=True, eq=False)
class Rt0Field:
    """Edge fluxes of an RT0 field, oriented by the global edge normals."""

    mesh: Mesh
    flux: np.ndarray

    def __post_init__(self):
        flux = np.asarray(self.flux, dtype=float)
        if flux.shape != (self.mesh.n_edges,):
            raise ValueError("need exactly one flux per mesh edge")
        object.__setattr__(self, "flux", flux)

    def __add__(self, other: "Rt0Field") -> "Rt0Field":
        _same_mesh(self.mesh, other.mesh)
        return Rt0Field(self.mesh, self.flux + other.flux)

    def __neg__(self) -> "Rt0Field":
        return Rt0Field(self.mesh, -self.flux)

    def scale(self, s: float) -> "Rt0Field":
        return Rt0Field(self.mesh, s * self.flux)

    def local_fluxes(self) -> np.ndarray:
        """Outward fluxes per triangle and local edge, shape (n_tri, 3)."""
        return self.mesh.tri_edge_signs * self.flux[self.mesh.tri_edges]

    def divergence(self) -> np.ndarray:
        return self.local_fluxes().sum(axis=1) / self.mesh.areas

    def evaluate(self, rule: TriangleRule) -> np.ndarray:
        """Vector values at the rule's points in every triangle, shape (n_tri, nq, 2)."""
        m = self.mesh
        x = physical_points(m, rule)
        verts = m.nodes[m.triangles]
        coef = self.local_fluxes() / (2.0 * m.areas[:, None])
        # Σ_i c_i (x - P_i) = (Σ_i c_i) x - Σ_i c_i P_i
        return coef.sum(axis=1)[:, None, None] * x - np.einsum("ti,tid->td", coef, verts)[:, None, :]


def _same_mesh(a: Mesh, b: Mesh) -> None:
    if a is not b and (a.n_cells_per_side != b.n_cells_per_side or a.n_nodes != b.n_nodes):
        raise ValueError("fields live on different meshes")


def p1_gradients(mesh: Mesh, values: np.ndarray) -> np.ndarray:
    """Elementwise constant gradient of a nodal P1 field, shape (n_tri, 2)."""
    values = np.asarray(values, dtype=float)
    if values.shape != (mesh.n_nodes,):
        raise ValueError("P1 field needs one value per mesh node")
    return np.einsum("ti,tid->td", values[mesh.triangles], mesh.barycentric_gradients())


def reconstruct_rt0(mesh: Mesh, values: np.ndarray, nu_cells=1.0) -> Rt0Field:
    """RT0 field approximating ``ν∇v`` by averaging the normal fluxes of both neighbours.

    ``values`` is a nodal P1 field over all mesh nodes and ``nu_cells`` a
    scalar or one value per triangle. For ``-ν∇v`` reconstruct ``-v``.
    """
    grad = p1_gradients(mesh, values) * np.broadcast_to(np.asarray(nu_cells, float), (mesh.n_triangles,))[:, None]
    flux_len = mesh.edge_normals * mesh.edge_lengths[:, None]
    left, right = mesh.edge_triangles[:, 0], mesh.edge_triangles[:, 1]
    a = np.einsum("ed,ed->e", grad[left], flux_len)
    inner = right >= 0
    b = a.copy()
    b[inner] = np.einsum("ed,ed->e", grad[right[inner]], flux_len[inner])
    return Rt0Field(mesh, 0.5 * (a + b))


def rt0_interpolate(mesh: Mesh, field, order: int = 4) -> Rt0Field:
    """Canonical RT0 interpolant of a vector function ``field(x, y) -> (..., 2)``.

    Edge fluxes come from Gauss-Legendre quadrature along each edge.
    """
    g, w = np.polynomial.legendre.leggauss(order)
    s = 0.5 * (g + 1.0)
    p0 = mesh.nodes[mesh.edges[:, 0]]
    p1 = mesh.nodes[mesh.edges[:, 1]]
    pts = p0[:, None, :] + s[None, :, None] * (p1 - p0)[:, None, :]
    vals = np.asarray(field(pts[..., 0], pts[..., 1]), dtype=float)
    normal_comp = np.einsum("eqd,ed->eq", vals, mesh.edge_normals)
    return Rt0Field(mesh, 0.5 * mesh.edge_lengths * (normal_comp @ w))


def rt0_divergence(f: Rt0Field) -> np.ndarray:
    """Piecewise-constant divergence, one value per triangle."""
    return f.divergence()


def normal_jumps(f: Rt0Field) -> np.ndarray:
    """Jump of ``τ·n_e`` at every interior edge midpoint, from both sides' local formulas."""
    m = f.mesh
    rule = midedge_rule()  # point j lies on the edge opposite local vertex j
    vals = f.evaluate(rule)
    inner = np.flatnonzero(m.edge_triangles[:, 1] >= 0)
    out = np.empty(inner.size)
    for side in (0, 1):
        t = m.edge_triangles[inner, side]
        local = np.argmax(m.tri_edges[t] == inner[:, None], axis=1)
        v = np.einsum("ed,ed->e", vals[t, local], m.edge_normals[inner])
        out = v if side == 0 else out - v
    return out
