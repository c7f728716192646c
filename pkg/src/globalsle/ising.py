"""Critical Ising model on a discrete polygon with alternating boundary spins.

Spins live on the vertices of the polygon; boundary vertices are frozen.  The
arc starting at an odd mark carries ``+1`` and the arc starting at an even
mark carries ``-1``.  Interfaces are traced on the medial graph: they cross
edges whose endpoints disagree, keep ``+`` on the left and turn left in a
checkerboard cell.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numba as nb
import numpy as np

from .combinatorics import LinkPattern, pattern_of_matching
from .errors import NonPlanarError, TracingError
from .lattice import DiscretePolygon, build_rectangle

BETA_C = 0.5 * math.log(1.0 + math.sqrt(2.0))


def alternating_boundary(p: DiscretePolygon) -> np.ndarray:
    """Boundary spin per boundary position (counterclockwise)."""
    if p.n_marks == 0 or p.n_marks % 2:
        raise ValueError("alternating boundary conditions need an even, positive number of marks")
    arc = p.arc_of_boundary_position()
    return np.where(arc % 2 == 1, 1, -1).astype(np.int8)


@dataclass
class SpinConfig:
    polygon: DiscretePolygon
    spins: np.ndarray
    fixed: np.ndarray
    beta: float = BETA_C
    seed: int | None = None
    sweeps: int = 0

    @property
    def boundary_fixed(self) -> np.ndarray:
        return self.spins[self.polygon.boundary_vertices]

    def grid(self) -> np.ndarray:
        """Spins as an ``(ny + 1, nx + 1)`` array indexed ``[j, i]``."""
        return self.spins.reshape(self.polygon.ny + 1, self.polygon.nx + 1)

    def magnetization(self, mask=None) -> float:
        m = ~self.fixed if mask is None else mask
        return float(self.spins[m].mean())


def spin_config(p: DiscretePolygon, boundary=None, interior=None) -> SpinConfig:
    """Configuration with frozen boundary.

    ``boundary`` is ``None`` (alternating rule), a constant sign, or one sign
    per boundary position.  ``interior`` is an optional full spin vector or
    ``(ny + 1, nx + 1)`` grid whose non-boundary entries are kept.
    """
    if boundary is None:
        bvals = alternating_boundary(p)
    else:
        bvals = np.broadcast_to(np.asarray(boundary, dtype=np.int8), (p.n_boundary,))
    if not np.all(np.abs(bvals) == 1):
        raise ValueError("spins must be +1 or -1")
    spins = np.ones(p.n_vertices, dtype=np.int8)
    if interior is not None:
        spins[:] = np.asarray(interior, dtype=np.int8).ravel()
    spins[p.boundary_vertices] = bvals
    fixed = p.is_boundary_vertex.copy()
    return SpinConfig(p, spins, fixed)


@nb.njit(cache=True)
def _heat_bath(spins, order, width, uniforms, table):
    # free vertices always have four neighbours
    k = 0
    for _ in range(len(uniforms) // len(order)):
        for v in order:
            h = spins[v - 1] + spins[v + 1] + spins[v - width] + spins[v + width]
            spins[v] = 1 if uniforms[k] < table[h + 4] else -1
            k += 1


def _update_order(p: DiscretePolygon, fixed: np.ndarray) -> np.ndarray:
    free = np.flatnonzero(~fixed)
    i, j = p.vertex_coords(free)
    # checkerboard: one colour class, then the other
    return np.concatenate([free[(i + j) % 2 == 0], free[(i + j) % 2 == 1]]).astype(np.int64)


def run_heat_bath(cfg: SpinConfig, sweeps: int, seed, chunk: int = 1 << 20) -> SpinConfig:
    """Advance ``cfg`` in place by ``sweeps`` heat-bath sweeps of the free spins.

    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be at least 1")
    if not np.all(cfg.fixed[cfg.polygon.boundary_vertices]):
        raise ValueError("boundary vertices must be frozen")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    order = _update_order(cfg.polygon, cfg.fixed)
    if len(order):
        # P(+1 | local field h) for h in {-4, ..., 4}
        table = 1.0 / (1.0 + np.exp(-2.0 * cfg.beta * np.arange(-4, 5)))
        per_chunk = max(1, chunk // len(order))
        done = 0
        while done < sweeps:
            n = min(per_chunk, sweeps - done)
            _heat_bath(cfg.spins, order, cfg.polygon.nx + 1, rng.random(n * len(order)), table)
            done += n
    cfg.sweeps += sweeps
    if not isinstance(seed, np.random.Generator):
        cfg.seed = seed
    return cfg


def default_burn_in(p: DiscretePolygon) -> int:
    return 10 * max(p.nx, p.ny) ** 2


def sample_critical_ising(p: DiscretePolygon, sweeps: int, seed: int, boundary=None,
                          beta: float = BETA_C) -> SpinConfig:
    """Heat-bath dynamics at ``beta_c`` from the all-plus interior."""
    if sweeps < 1:
        raise ValueError("sweeps must be at least 1")
    cfg = spin_config(p, boundary)
    cfg.beta = beta
    return run_heat_bath(cfg, sweeps, seed)


# ----------------------------------------------------------------------------
# interfaces


@dataclass
class InterfacePath:
    """Medial path: the crossed primal edges (medial vertices) in order."""

    edges: np.ndarray
    points: np.ndarray
    start_mark: int
    end_mark: int


def _edge_marks(p: DiscretePolygon) -> dict:
    # medial vertex of mark k: boundary edge arriving at the mark
    return {int(p.boundary_edges[(m - 1) % p.n_boundary]): k + 1 for k, m in enumerate(p.marks)}


def trace_interfaces(cfg: SpinConfig) -> list[InterfacePath]:
    p = cfg.polygon
    n2 = p.n_marks
    if n2 < 2 or n2 % 2:
        raise ValueError("need alternating boundary conditions with N >= 1")
    s = cfg.spins
    nx, ny = p.nx, p.ny
    edge_mark = _edge_marks(p)
    used = set()
    paths = []
    for start in range(2, n2 + 1, 2):
        b = (p.marks[start - 1] - 1) % p.n_boundary
        e0 = int(p.boundary_edges[b])
        cell, side = _boundary_cell(p, e0)
        u, w = (p.boundary_vertices[b], p.boundary_vertices[(b + 1) % p.n_boundary])
        if not (s[u] == 1 and s[w] == -1):
            raise TracingError(f"no spin change at mark {start}")
        edges = [e0]
        n_steps = 0
        while True:
            ci, cj = cell
            if (ci, cj, side) in used:
                raise TracingError("interface revisits a directed medial edge")
            used.add((ci, cj, side))
            corners = p.cell_corners(ci, cj)
            sides = p.cell_edges(ci, cj)
            exit_side = -1
            # left, straight, right relative to the direction of travel
            for cand in ((side + 3) % 4, (side + 2) % 4, (side + 1) % 4):
                c1, c2 = corners[cand], corners[(cand + 1) % 4]
                if s[c2] == 1 and s[c1] == -1:
                    exit_side = cand
                    break
            if exit_side < 0:
                raise TracingError("interface has no admissible exit")
            e = int(sides[exit_side])
            edges.append(e)
            nxt = _across(ci, cj, exit_side)
            if not (0 <= nxt[0] < nx and 0 <= nxt[1] < ny):
                if e not in edge_mark:
                    raise TracingError("interface exits the domain away from a mark")
                end = edge_mark[e]
                break
            cell, side = nxt, (exit_side + 2) % 4
            n_steps += 1
            if n_steps > 4 * p.n_edges:
                raise TracingError("interface does not terminate")
        arr = np.asarray(edges, dtype=np.int64)
        paths.append(InterfacePath(arr, p.edge_midpoint(arr), start, end))
    ends = sorted([q.start_mark for q in paths] + [q.end_mark for q in paths])
    if ends != list(range(1, n2 + 1)):
        raise TracingError("interface endpoints do not exhaust the marks")
    return paths


_STEP = ((0, -1), (1, 0), (0, 1), (-1, 0))


def _across(ci, cj, side):
    di, dj = _STEP[side]
    return (ci + di, cj + dj)


def _boundary_cell(p: DiscretePolygon, e: int):
    """Interior cell adjacent to boundary edge ``e`` and the side through which it is entered."""
    if e < p.n_horizontal:
        i, j = e % p.nx, e // p.nx
        return ((i, 0), 0) if j == 0 else ((i, p.ny - 1), 2)
    k = e - p.n_horizontal
    i, j = k % (p.nx + 1), k // (p.nx + 1)
    return ((0, j), 3) if i == 0 else ((p.nx - 1, j), 1)


def classify_pattern(paths) -> LinkPattern:
    try:
        return pattern_of_matching([(q.start_mark, q.end_mark) for q in paths])
    except NonPlanarError as exc:
        raise TracingError(f"traced interfaces are non-planar: {exc}") from exc


# ----------------------------------------------------------------------------
# dumps


def dump_pbm(cfg: SpinConfig, path) -> None:
    """Plain PBM of the spins (black = minus) with the polygon spec in a comment."""
    g = cfg.grid()[::-1]
    bits = (g < 0).astype(int)
    lines = ["P1", "# polygon " + cfg.polygon.spec_json(), f"{g.shape[1]} {g.shape[0]}"]
    lines += [" ".join(map(str, row)) for row in bits]
    Path(path).write_text("\n".join(lines) + "\n")


def load_pbm(path) -> SpinConfig:
    lines = Path(path).read_text().splitlines()
    if lines[0].strip() != "P1":
        raise ValueError("not a plain PBM file")
    spec = None
    body = []
    for line in lines[1:]:
        if line.startswith("# polygon "):
            spec = json.loads(line[len("# polygon "):])
        elif line and not line.startswith("#"):
            body.append(line)
    if spec is None:
        raise ValueError("missing polygon spec")
    width, height = map(int, body[0].split())
    bits = np.array(" ".join(body[1:]).split(), dtype=int).reshape(height, width)[::-1]
    poly = DiscretePolygon(spec["nx"], spec["ny"], spec["delta"], tuple(spec["mark_positions"]),
                           spec["ell"], tuple(spec["marks"] or ()))
    spins = np.where(bits.ravel() == 1, -1, 1).astype(np.int8)
    return SpinConfig(poly, spins, poly.is_boundary_vertex.copy())


def dobrushin_square(L: int) -> DiscretePolygon:
    """``L x L`` square with marks at the bottom-side and top-side midpoints.

    The plus arc runs counterclockwise from the bottom midpoint to the top
    midpoint (right half of the boundary).
    """
    return build_rectangle(1.0, 1.0 / L, (0.125, 0.625))
