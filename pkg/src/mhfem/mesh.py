"""Uniform right-triangle meshes of the unit square.

Every square cell ``(i, j)`` is split along its lower-left to upper-right
diagonal into the two counterclockwise triangles ``(a, b, c)`` and
``(a, c, d)``, where ``a, b, c, d`` are the cell corners in counterclockwise
order starting at the lower-left one. Nodes are numbered lexicographically
with ``x`` running fastest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Mesh", "build_uniform_mesh", "interior_node_index_map", "evaluate_p1"]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable P1/RT0 topology of a uniform triangulation.

    Attributes
    ----------
    n_cells_per_side : int
        Number of square cells along each side.
    nodes : (n_nodes, 2) array
        Node coordinates.
    triangles : (n_tri, 3) int array
        Counterclockwise vertex indices.
    edges : (n_edges, 2) int array
        Edge endpoints, always ``edges[:, 0] < edges[:, 1]``. The global
        orientation of an edge is from its first to its second node and the
        global unit normal is that tangent rotated clockwise.
    edge_triangles : (n_edges, 2) int array
        Adjacent triangles; the second entry is ``-1`` on the boundary.
    tri_edges : (n_tri, 3) int array
        Edge opposite to local vertex ``i`` in column ``i``.
    tri_edge_signs : (n_tri, 3) array
        ``+1`` where the global edge normal points out of the triangle.
    boundary_node_flags : (n_nodes,) bool array
    """

    n_cells_per_side: int
    nodes: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    edge_triangles: np.ndarray
    tri_edges: np.ndarray
    tri_edge_signs: np.ndarray
    boundary_node_flags: np.ndarray

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells_per_side

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def interior_nodes(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_node_flags)

    @property
    def n_interior(self) -> int:
        return int(np.count_nonzero(~self.boundary_node_flags))

    @property
    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def areas(self) -> np.ndarray:
        return np.abs(self.signed_areas)

    @property
    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)

    @property
    def edge_lengths(self) -> np.ndarray:
        d = self.nodes[self.edges[:, 1]] - self.nodes[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @property
    def edge_normals(self) -> np.ndarray:
        """Global unit normals, the tangent rotated clockwise."""
        d = self.nodes[self.edges[:, 1]] - self.nodes[self.edges[:, 0]]
        n = np.column_stack([d[:, 1], -d[:, 0]])
        return n / np.hypot(n[:, 0], n[:, 1])[:, None]

    @property
    def boundary_edges(self) -> np.ndarray:
        return np.flatnonzero(self.edge_triangles[:, 1] < 0)

    def barycentric_gradients(self) -> np.ndarray:
        """Gradients of the three barycentric coordinates, shape (n_tri, 3, 2)."""
        p = self.nodes[self.triangles]
        two_area = 2.0 * self.signed_areas
        grads = np.empty((self.n_triangles, 3, 2))
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            grads[:, i, 0] = (p[:, j, 1] - p[:, k, 1]) / two_area
            grads[:, i, 1] = (p[:, k, 0] - p[:, j, 0]) / two_area
        return grads


def build_uniform_mesh(n: int) -> Mesh:
    """Triangulate the unit square with ``n`` cells per side (``2 n**2`` triangles)."""
    if int(n) != n or n < 1:
        raise ValueError(f"need a positive number of cells per side, got {n!r}")
    n = int(n)
    h = 1.0 / n
    ij = np.arange(n + 1)
    x, y = np.meshgrid(ij * h, ij * h)
    nodes = np.column_stack([x.ravel(), y.ravel()])
    # snap the far side exactly onto 1.0
    nodes[np.isclose(nodes, 1.0)] = 1.0

    ci, cj = np.meshgrid(np.arange(n), np.arange(n))
    a = (cj * (n + 1) + ci).ravel()
    b = a + 1
    c = a + n + 2
    d = a + n + 1
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = np.column_stack([a, b, c])
    triangles[1::2] = np.column_stack([a, c, d])

    # local edge i is opposite local vertex i
    local = np.stack(
        [triangles[:, [1, 2]], triangles[:, [2, 0]], triangles[:, [0, 1]]], axis=1
    )
    pairs = np.sort(local.reshape(-1, 2), axis=1)
    edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    tri_edges = inverse.reshape(-1, 3)

    n_edges = edges.shape[0]
    owner = np.repeat(np.arange(triangles.shape[0]), 3)
    edge_triangles = np.full((n_edges, 2), -1, dtype=np.int64)
    order = np.argsort(inverse, kind="stable")
    sorted_edges = inverse[order]
    first = np.ones(order.size, dtype=bool)
    first[1:] = sorted_edges[1:] != sorted_edges[:-1]
    edge_triangles[sorted_edges[first], 0] = owner[order[first]]
    edge_triangles[sorted_edges[~first], 1] = owner[order[~first]]

    tangent = nodes[edges[:, 1]] - nodes[edges[:, 0]]
    normal = np.column_stack([tangent[:, 1], -tangent[:, 0]])
    mid = 0.5 * (nodes[edges[:, 0]] + nodes[edges[:, 1]])
    opposite = nodes[triangles]
    out = mid[tri_edges] - opposite
    tri_edge_signs = np.sign(np.einsum("tid,tid->ti", normal[tri_edges], out))

    boundary = (
        (nodes[:, 0] == 0.0) | (nodes[:, 0] == 1.0) | (nodes[:, 1] == 0.0) | (nodes[:, 1] == 1.0)
    )
    return Mesh(
        n_cells_per_side=n,
        nodes=_frozen(nodes),
        triangles=_frozen(triangles),
        edges=_frozen(edges),
        edge_triangles=_frozen(edge_triangles),
        tri_edges=_frozen(tri_edges),
        tri_edge_signs=_frozen(tri_edge_signs),
        boundary_node_flags=_frozen(boundary),
    )


def interior_node_index_map(mesh: Mesh) -> dict[int, int]:
    """Map each interior node to its dof index ``0 .. n_int - 1``."""
    return {int(node): dof for dof, node in enumerate(mesh.interior_nodes)}


def evaluate_p1(mesh: Mesh, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Evaluate a nodal P1 field at arbitrary points of the closed unit square."""
    values = np.asarray(values, dtype=float)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = mesh.n_cells_per_side
    s = points * n
    cell = np.clip(np.floor(s).astype(np.int64), 0, n - 1)
    local = s - cell
    upper = local[:, 1] > local[:, 0]
    tri = 2 * (cell[:, 1] * n + cell[:, 0]) + upper
    verts = mesh.triangles[tri]
    # barycentric weights on the reference cell
    lx, ly = local[:, 0], local[:, 1]
    w = np.where(
        upper[:, None],
        np.column_stack([1.0 - ly, lx, ly - lx]),  # (a, c, d)
        np.column_stack([1.0 - lx, lx - ly, ly]),  # (a, b, c)
    )
    return np.einsum("pi,pi->p", w, values[verts])
