"""P1 mass and stiffness matrices and load vectors on the interior dofs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh
from .quadrature import TriangleRule, midedge_rule, physical_points

__all__ = [
    "FemMatrices",
    "Coefficient",
    "cell_values",
    "assemble_full",
    "assemble",
    "assemble_load",
    "load_vector",
]

Coefficient = Union[float, Callable[[np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True, eq=False)
class FemMatrices:
    """Mass ``M``, weighted mass ``M_sigma`` and stiffness ``K_nu`` on interior dofs."""

    M: sp.csr_matrix
    M_sigma: sp.csr_matrix
    K_nu: sp.csr_matrix
    sigma_cells: np.ndarray
    nu_cells: np.ndarray

    @property
    def n(self) -> int:
        return self.M.shape[0]


def cell_values(mesh: Mesh, coef: Coefficient, name: str = "coefficient") -> np.ndarray:
    """Sample a coefficient at triangle centroids; it must be positive."""
    if callable(coef):
        c = mesh.centroids
        vals = np.broadcast_to(np.asarray(coef(c[:, 0], c[:, 1]), dtype=float), (mesh.n_triangles,))
    else:
        vals = np.full(mesh.n_triangles, float(coef))
    if not np.all(vals > 0.0) or not np.all(np.isfinite(vals)):
        raise ValueError(f"{name} must be positive and finite on every triangle")
    return np.array(vals, dtype=float)


def _scatter(mesh: Mesh, local: np.ndarray) -> sp.csr_matrix:
    tri = mesh.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    A = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(mesh.n_nodes,) * 2).tocsr()
    A.sum_duplicates()
    A = ((A + A.T) * 0.5).tocsr()
    A.sort_indices()
    return A


def assemble_full(mesh: Mesh, sigma: Coefficient = 1.0, nu: Coefficient = 1.0):
    """Full (pre-Dirichlet) ``M``, ``M_sigma``, ``K_nu`` over all mesh nodes."""
    s = cell_values(mesh, sigma, "sigma")
    v = cell_values(mesh, nu, "nu")
    area = mesh.areas
    ref = (np.ones((3, 3)) + np.eye(3)) / 12.0
    m_loc = area[:, None, None] * ref
    g = mesh.barycentric_gradients()
    k_loc = np.einsum("tid,tjd->tij", g, g) * area[:, None, None]
    M = _scatter(mesh, m_loc)
    Ms = _scatter(mesh, s[:, None, None] * m_loc)
    K = _scatter(mesh, v[:, None, None] * k_loc)
    return M, Ms, K


def assemble(mesh: Mesh, sigma: Coefficient = 1.0, nu: Coefficient = 1.0) -> FemMatrices:
    """Assemble the three matrices and restrict them to the interior dofs."""
    M, Ms, K = assemble_full(mesh, sigma, nu)
    idx = mesh.interior_nodes

    def restrict(A):
        B = A[idx][:, idx].tocsr()
        B.sort_indices()
        return B

    return FemMatrices(
        M=restrict(M),
        M_sigma=restrict(Ms),
        K_nu=restrict(K),
        sigma_cells=cell_values(mesh, sigma, "sigma"),
        nu_cells=cell_values(mesh, nu, "nu"),
    )


def load_vector(mesh: Mesh, qvalues: np.ndarray, rule: TriangleRule) -> np.ndarray:
    """``∫ g φ_j`` over all nodes from ``g`` sampled at the rule's points.

    ``qvalues`` has shape (n_tri, nq).
    """
    area = mesh.areas
    contrib = np.einsum("tq,q,qi->ti", qvalues, rule.weights, rule.bary) * area[:, None]
    return np.bincount(mesh.triangles.ravel(), weights=contrib.ravel(), minlength=mesh.n_nodes)


def assemble_load(mesh: Mesh, g) -> np.ndarray:
    """Interior load vector ``∫ g φ_j`` with the mid-edge rule.

    ``g`` is a callable ``g(x, y)`` or a nodal vector over all mesh nodes,
    which is then interpolated as a P1 field.
    """
    rule = midedge_rule()
    if callable(g):
        pts = physical_points(mesh, rule)
        q = np.broadcast_to(np.asarray(g(pts[..., 0], pts[..., 1]), dtype=float), pts.shape[:2])
    else:
        g = np.asarray(g, dtype=float)
        if g.shape != (mesh.n_nodes,):
            raise ValueError("nodal load data must have one value per mesh node")
        q = g[mesh.triangles] @ rule.bary.T
    return load_vector(mesh, q, rule)[mesh.interior_nodes]
