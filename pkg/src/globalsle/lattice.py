"""Square-lattice approximations of rectangles with marked boundary vertices.

Vertices are ``(i, j)`` with ``0 <= i <= nx`` and ``0 <= j <= ny``; the
physical position of a vertex is ``delta * (i + 1j * j)``.  Edge ids list the
horizontal edges ``(i, j) -> (i + 1, j)`` first, then the vertical ones
``(i, j) -> (i, j + 1)``.  The boundary is walked counterclockwise from the
corner ``(0, 0)``; boundary edge ``b`` joins boundary vertices ``b`` and
``b + 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ResolutionError


@dataclass(frozen=True)
class DiscretePolygon:
    nx: int
    ny: int
    delta: float
    marks: tuple = ()
    ell: float = 1.0
    mark_fractions: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("polygon needs at least one cell")
        nb = self.n_boundary
        marks = tuple(int(m) % nb for m in self.marks)
        if len(set(marks)) != len(marks):
            raise ResolutionError("two marks share a boundary vertex")
        if len(marks) > 1:
            # strictly counterclockwise up to a cyclic rotation
            rot = marks.index(min(marks))
            if list(marks[rot:] + marks[:rot]) != sorted(marks):
                raise ValueError("marks are not in counterclockwise order")
        object.__setattr__(self, "marks", marks)

    # ---- counts and indexing -------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def n_horizontal(self) -> int:
        return self.nx * (self.ny + 1)

    @property
    def n_edges(self) -> int:
        return self.n_horizontal + (self.nx + 1) * self.ny

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def n_boundary(self) -> int:
        return 2 * (self.nx + self.ny)

    @property
    def n_marks(self) -> int:
        return len(self.marks)

    def vid(self, i, j):
        return j * (self.nx + 1) + i

    def hid(self, i, j):
        return j * self.nx + i

    def vedge(self, i, j):
        return self.n_horizontal + j * (self.nx + 1) + i

    def cid(self, i, j):
        return j * self.nx + i

    def vertex_coords(self, v):
        v = np.asarray(v)
        return v % (self.nx + 1), v // (self.nx + 1)

    def vertex_point(self, v) -> np.ndarray:
        i, j = self.vertex_coords(v)
        return self.delta * (i + 1j * j)

    @cached_property
    def edge_endpoints(self) -> np.ndarray:
        nx, ny = self.nx, self.ny
        out = np.empty((self.n_edges, 2), dtype=np.int64)
        jj, ii = np.mgrid[0:ny + 1, 0:nx]
        out[: self.n_horizontal, 0] = (jj * (nx + 1) + ii).ravel()
        out[: self.n_horizontal, 1] = (jj * (nx + 1) + ii + 1).ravel()
        jj, ii = np.mgrid[0:ny, 0:nx + 1]
        out[self.n_horizontal:, 0] = (jj * (nx + 1) + ii).ravel()
        out[self.n_horizontal:, 1] = ((jj + 1) * (nx + 1) + ii).ravel()
        return out

    def edge_midpoint(self, e) -> np.ndarray:
        ends = self.edge_endpoints[np.asarray(e)]
        return 0.5 * (self.vertex_point(ends[..., 0]) + self.vertex_point(ends[..., 1]))

    def cell_edges(self, i, j):
        """``(bottom, right, top, left)`` edge ids of cell ``(i, j)``; counterclockwise."""
        return (self.hid(i, j), self.vedge(i + 1, j), self.hid(i, j + 1), self.vedge(i, j))

    def cell_corners(self, i, j):
        """``(BL, BR, TR, TL)`` vertex ids; side ``s`` joins corners ``s`` and ``s + 1``."""
        return (self.vid(i, j), self.vid(i + 1, j), self.vid(i + 1, j + 1), self.vid(i, j + 1))

    @cached_property
    def neighbors(self):
        """``(nbr, nbr_edge)`` arrays of shape ``(n_vertices, 4)`` padded with ``-1``."""
        nbr = -np.ones((self.n_vertices, 4), dtype=np.int64)
        ned = -np.ones((self.n_vertices, 4), dtype=np.int64)
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        for e, (u, w) in enumerate(self.edge_endpoints):
            nbr[u, deg[u]] = w
            ned[u, deg[u]] = e
            deg[u] += 1
            nbr[w, deg[w]] = u
            ned[w, deg[w]] = e
            deg[w] += 1
        return nbr, ned

    # ---- boundary --------------------------------------------------------------

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        nx, ny = self.nx, self.ny
        out = [self.vid(i, 0) for i in range(nx)]
        out += [self.vid(nx, j) for j in range(ny)]
        out += [self.vid(i, ny) for i in range(nx, 0, -1)]
        out += [self.vid(0, j) for j in range(ny, 0, -1)]
        return np.asarray(out, dtype=np.int64)

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        nx, ny = self.nx, self.ny
        out = [self.hid(i, 0) for i in range(nx)]
        out += [self.vedge(nx, j) for j in range(ny)]
        out += [self.hid(i - 1, ny) for i in range(nx, 0, -1)]
        out += [self.vedge(0, j - 1) for j in range(ny, 0, -1)]
        return np.asarray(out, dtype=np.int64)

    @cached_property
    def boundary_edge_index(self) -> dict:
        return {int(e): b for b, e in enumerate(self.boundary_edges)}

    @cached_property
    def is_boundary_vertex(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary_vertices] = True
        return mask

    @cached_property
    def is_boundary_edge(self) -> np.ndarray:
        mask = np.zeros(self.n_edges, dtype=bool)
        mask[self.boundary_edges] = True
        return mask

    def mark_vertex(self, k: int) -> int:
        """Vertex id of mark ``k`` (1-based)."""
        return int(self.boundary_vertices[self.marks[k - 1]])

    def arc_boundary_range(self, k: int) -> np.ndarray:
        """Boundary positions from mark ``k`` up to (excluding) mark ``k + 1``."""
        start = self.marks[k - 1]
        stop = self.marks[k % self.n_marks]
        length = (stop - start) % self.n_boundary or self.n_boundary
        return (start + np.arange(length)) % self.n_boundary

    def arc_vertices(self, k: int) -> np.ndarray:
        """Boundary vertices of arc ``k`` from mark ``k`` to mark ``k + 1`` inclusive."""
        pos = self.arc_boundary_range(k)
        pos = np.append(pos, (pos[-1] + 1) % self.n_boundary)
        return self.boundary_vertices[pos]

    def arc_edges(self, k: int) -> np.ndarray:
        return self.boundary_edges[self.arc_boundary_range(k)]

    def arc_of_boundary_position(self) -> np.ndarray:
        """Arc index (1-based) of each boundary position; a mark opens its arc."""
        out = np.zeros(self.n_boundary, dtype=np.int64)
        for k in range(1, self.n_marks + 1):
            out[self.arc_boundary_range(k)] = k
        return out

    # ---- faces -----------------------------------------------------------------

    def edge_faces(self, e: int):
        """The two dual vertices of edge ``e``: cell ids, or ``n_cells + b`` for the outside of boundary edge ``b``."""
        nx, ny = self.nx, self.ny
        outside = self.n_cells + self.boundary_edge_index.get(int(e), -1)
        if e < self.n_horizontal:
            i, j = e % nx, e // nx
            below = self.cid(i, j - 1) if j > 0 else outside
            above = self.cid(i, j) if j < ny else outside
            return below, above
        k = e - self.n_horizontal
        i, j = k % (nx + 1), k // (nx + 1)
        right = self.cid(i, j) if i < nx else outside
        left = self.cid(i - 1, j) if i > 0 else outside
        return right, left

    @cached_property
    def _dual_lookup(self) -> dict:
        return {frozenset(self.edge_faces(e)): e for e in range(self.n_edges)}

    def primal_edge_of_dual(self, f1: int, f2: int) -> int:
        return self._dual_lookup[frozenset((f1, f2))]

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_cells + 1

    def spec(self) -> dict:
        return {"ell": self.ell, "delta": self.delta, "nx": self.nx, "ny": self.ny,
                "marks": list(self.mark_fractions) if self.mark_fractions else None,
                "mark_positions": list(self.marks)}

    def spec_json(self) -> str:
        return json.dumps(self.spec(), sort_keys=True)


def build_rectangle(ell: float, delta: float, marks=()) -> DiscretePolygon:
    """Grid approximation of ``[0, ell] x [0, 1]``.

    ``marks`` are counterclockwise fractions of the perimeter measured from the
    corner ``0``; each snaps to the nearest boundary vertex, ties going
    counterclockwise.
    """
    if ell <= 0 or delta <= 0:
        raise ValueError("ell and delta must be positive")
    nx = max(1, int(round(ell / delta)))
    ny = max(1, int(round(1.0 / delta)))
    nb = 2 * (nx + ny)
    snapped = []
    for s in marks:
        pos = (float(s) % 1.0) * nb
        idx = int(np.floor(pos + 0.5)) % nb
        snapped.append(idx)
    if len(set(snapped)) != len(snapped):
        raise ResolutionError(f"marks {list(marks)} collide at mesh {delta}")
    return DiscretePolygon(nx, ny, delta, tuple(snapped), ell, tuple(float(s) for s in marks))


def square_marks_midpoints(ell: float = 1.0) -> tuple:
    """Fractions of the bottom-side and top-side midpoints, in that order."""
    per = 2 * ell + 2
    return (0.5 * ell / per, (ell + 1 + 0.5 * ell) / per)


@dataclass
class MedialGraph:
    """Medial vertices are edge midpoints; medial edges are cell corners.

    ``corner_edges[c]`` holds the two primal edges joined by corner ``c`` and
    ``corner_vertex[c]`` / ``corner_cell[c]`` the primal vertex and cell the
    corner separates.
    """

    polygon: DiscretePolygon
    points: np.ndarray
    corner_edges: np.ndarray
    corner_vertex: np.ndarray
    corner_cell: np.ndarray
    marked: np.ndarray

    @property
    def n_vertices(self) -> int:
        return len(self.points)

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n_vertices)]
        for a, b in self.corner_edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj


def medial_graph(p: DiscretePolygon) -> MedialGraph:
    edges, verts, cells = [], [], []
    for j in range(p.ny):
        for i in range(p.nx):
            sides = p.cell_edges(i, j)
            corners = p.cell_corners(i, j)
            c = p.cid(i, j)
            # corner s sits between side s-1 and side s
            for s in range(4):
                edges.append((sides[s - 1], sides[s]))
                verts.append(corners[s])
                cells.append(c)
    # a mark's medial vertex is the midpoint of the boundary edge arriving at it
    marked = np.array([p.boundary_edges[(m - 1) % p.n_boundary] for m in p.marks], dtype=np.int64)
    return MedialGraph(p, p.edge_midpoint(np.arange(p.n_edges)), np.asarray(edges, dtype=np.int64),
                       np.asarray(verts, dtype=np.int64), np.asarray(cells, dtype=np.int64), marked)
