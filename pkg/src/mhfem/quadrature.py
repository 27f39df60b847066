"""Triangle quadrature rules in barycentric form."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mesh import Mesh

__all__ = ["TriangleRule", "midedge_rule", "collapsed_gauss_rule", "physical_points"]


@dataclass(frozen=True)
class TriangleRule:
    """Barycentric points (nq, 3) and weights summing to one."""

    bary: np.ndarray
    weights: np.ndarray

    @property
    def n_points(self) -> int:
        return self.weights.size


def midedge_rule() -> TriangleRule:
    """Three edge midpoints, exact for quadratics."""
    bary = np.array([[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]])
    return TriangleRule(bary, np.full(3, 1.0 / 3.0))


@lru_cache(maxsize=None)
def collapsed_gauss_rule(order: int = 5) -> TriangleRule:
    """Gauss-Legendre tensor rule pulled onto the triangle by the Duffy map.

    Exact for polynomials of degree ``2 * order - 2``.
    """
    g, w = np.polynomial.legendre.leggauss(order)
    g = 0.5 * (g + 1.0)
    w = 0.5 * w
    u, v = np.meshgrid(g, g, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    # (u, v) in the unit square -> (s, t) = (u, v (1 - u)) in the reference triangle
    s = u.ravel()
    t = (v * (1.0 - u)).ravel()
    weights = 2.0 * (wu * wv * (1.0 - u)).ravel()
    bary = np.column_stack([1.0 - s - t, s, t])
    return TriangleRule(bary, weights)


def physical_points(mesh: Mesh, rule: TriangleRule) -> np.ndarray:
    """Quadrature points of every triangle, shape (n_tri, nq, 2)."""
    return np.einsum("qi,tid->tqd", rule.bary, mesh.nodes[mesh.triangles])
