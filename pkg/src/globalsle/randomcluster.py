"""Critical random-cluster model with alternating wired and free boundary arcs.

Arcs starting at odd marks are wired: their boundary edges are held open, so
every vertex of such an arc (its two marks included) lies in one cluster.
Distinct wired arcs are not wired to each other.  All other edges are random.
``wiring="free"`` makes every edge random and ``wiring="wired"`` holds the
whole boundary open.

The loop representation lives on ports: each edge has four ports
``(end, side)`` at its midpoint and each corner (vertex, face) links two
ports.  An open edge joins the ports on each side, a closed edge joins the
ports at each end.  Outer corners exist only at boundary vertices strictly
inside a free arc; the missing outer ports next to the marks are the stubs
where the interfaces begin and end.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numba as nb
import numpy as np

from .combinatorics import LinkPattern, pattern_of_matching
from .errors import BoundsError, NonPlanarError, TracingError
from .ising import InterfacePath
from .lattice import DiscretePolygon

WIRINGS = ("alternating", "free", "wired")


def critical_p(q: float) -> float:
    return math.sqrt(q) / (1.0 + math.sqrt(q))


def dual_p(p: float, q: float) -> float:
    """``p*`` with ``p p* / ((1 - p)(1 - p*)) = q``."""
    return q * (1.0 - p) / (p + q * (1.0 - p))


def _check_q(q: float) -> None:
    if not 1.0 <= q < 4.0:
        raise BoundsError(f"q={q} outside [1, 4)")


@dataclass
class BondConfig:
    """Edge occupations with boundary status.

    ``status[e]`` is ``-1`` for a random edge and the frozen value otherwise.
    ``wired_parity`` is the parity of the arc indices that are wired (``1`` for
    the primal alternating condition, ``0`` for its dual).
    """

    polygon: DiscretePolygon
    omega: np.ndarray
    status: np.ndarray
    q: float
    p: float
    wiring: str = "alternating"
    wired_parity: int = 1
    dual: bool = False
    seed: int | None = None
    sweeps: int = 0

    @property
    def random_edges(self) -> np.ndarray:
        return np.flatnonzero(self.status < 0)

    def copy(self) -> "BondConfig":
        return replace(self, omega=self.omega.copy(), status=self.status.copy())

    def n_open(self) -> int:
        return int(self.omega.sum())

    def n_clusters(self) -> int:
        return int(_n_components(self.polygon, self.omega))


def bond_config(p: DiscretePolygon, q: float, p_edge: float | None = None, wiring: str = "alternating",
                omega=None) -> BondConfig:
    _check_q(q)
    if wiring not in WIRINGS:
        raise ValueError(f"wiring must be one of {WIRINGS}")
    status = -np.ones(p.n_edges, dtype=np.int8)
    if wiring == "alternating":
        if p.n_marks == 0 or p.n_marks % 2:
            raise ValueError("alternating boundary conditions need an even, positive number of marks")
        for k in range(1, p.n_marks + 1, 2):
            status[p.arc_edges(k)] = 1
    elif wiring == "wired":
        status[p.boundary_edges] = 1
    om = np.zeros(p.n_edges, dtype=np.uint8) if omega is None else np.asarray(omega, dtype=np.uint8).copy()
    om[status >= 0] = status[status >= 0]
    return BondConfig(p, om, status, float(q), critical_p(q) if p_edge is None else float(p_edge), wiring)


# ----------------------------------------------------------------------------
# samplers


@nb.njit(cache=True)
def _connected(u, w, skip, omega, nbr, ned, stamp, mark, queue):
    if u == w:
        return True
    head = 0
    tail = 1
    queue[0] = u
    stamp[u] = mark
    while head < tail:
        v = queue[head]
        head += 1
        for k in range(4):
            e = ned[v, k]
            if e < 0 or e == skip or omega[e] == 0:
                continue
            x = nbr[v, k]
            if stamp[x] == mark:
                continue
            if x == w:
                return True
            stamp[x] = mark
            queue[tail] = x
            tail += 1
    return False


@nb.njit(cache=True)
def _fk_heat_bath(omega, edges, ends, nbr, ned, uniforms, p_conn, p_disc, stamp, queue, mark0):
    mark = mark0
    k = 0
    for _ in range(len(uniforms) // len(edges)):
        for e in edges:
            mark += 1
            if _connected(ends[e, 0], ends[e, 1], e, omega, nbr, ned, stamp, mark, queue):
                pr = p_conn
            else:
                pr = p_disc
            omega[e] = 1 if uniforms[k] < pr else 0
            k += 1
    return mark


@nb.njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@nb.njit(cache=True)
def _labels(omega, ends, n_vertices):
    parent = np.arange(n_vertices)
    for e in range(len(omega)):
        if omega[e]:
            a = _find(parent, ends[e, 0])
            b = _find(parent, ends[e, 1])
            if a != b:
                parent[a] = b
    for v in range(n_vertices):
        parent[v] = _find(parent, v)
    return parent


@nb.njit(cache=True)
def _edwards_sokal(omega, edges, ends, n_vertices, q, p, colour_u, bond_u):
    roots = _labels(omega, ends, n_vertices)
    colour = np.empty(n_vertices, dtype=np.int64)
    for v in range(n_vertices):
        colour[v] = -1
    for v in range(n_vertices):
        r = roots[v]
        if colour[r] < 0:
            colour[r] = min(int(colour_u[r] * q), q - 1)
    k = 0
    for e in edges:
        if colour[roots[ends[e, 0]]] == colour[roots[ends[e, 1]]] and bond_u[k] < p:
            omega[e] = 1
        else:
            omega[e] = 0
        k += 1


def _n_components(p: DiscretePolygon, omega: np.ndarray) -> int:
    lab = _labels(np.asarray(omega, dtype=np.uint8), p.edge_endpoints, p.n_vertices)
    return len(np.unique(lab))


def run_fk(cfg: BondConfig, sweeps: int, seed, method: str = "heat-bath") -> BondConfig:
    """Advance ``cfg`` in place.

    ``method="heat-bath"`` is single-edge Gibbs sampling with an exact
    connectivity test; ``"edwards-sokal"`` alternates a spin layer and a bond
    layer and needs an integer ``q``.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be at least 1")
    _check_q(cfg.q)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    poly = cfg.polygon
    edges = cfg.random_edges.astype(np.int64)
    ends = poly.edge_endpoints
    if len(edges) == 0:
        cfg.sweeps += sweeps
        return cfg
    if method == "heat-bath":
        nbr, ned = poly.neighbors
        stamp = np.zeros(poly.n_vertices, dtype=np.int64)
        queue = np.empty(poly.n_vertices, dtype=np.int64)
        p_disc = cfg.p / (cfg.p + cfg.q * (1.0 - cfg.p))
        per_chunk = max(1, (1 << 20) // len(edges))
        done, mark = 0, 0
        while done < sweeps:
            n = min(per_chunk, sweeps - done)
            mark = _fk_heat_bath(cfg.omega, edges, ends, nbr, ned, rng.random(n * len(edges)),
                                 cfg.p, p_disc, stamp, queue, mark)
            done += n
    elif method == "edwards-sokal":
        if cfg.q != int(cfg.q):
            raise BoundsError("Edwards-Sokal moves need an integer q")
        for _ in range(sweeps):
            _edwards_sokal(cfg.omega, edges, ends, poly.n_vertices, int(cfg.q), cfg.p,
                           rng.random(poly.n_vertices), rng.random(len(edges)))
    else:
        raise ValueError(f"unknown method {method!r}")
    cfg.sweeps += sweeps
    if not isinstance(seed, np.random.Generator):
        cfg.seed = seed
    return cfg


def sample_critical_fk(p: DiscretePolygon, q: float, sweeps: int, seed, wiring: str = "alternating",
                       method: str = "heat-bath") -> BondConfig:
    """Sampler at ``p_c(q)`` started from the all-closed configuration."""
    _check_q(q)
    if sweeps < 1:
        raise ValueError("sweeps must be at least 1")
    cfg = bond_config(p, q, wiring=wiring)
    return run_fk(cfg, sweeps, seed, method)


def default_burn_in(p: DiscretePolygon, method: str = "heat-bath") -> int:
    L = max(p.nx, p.ny)
    return 10 * L * L if method == "heat-bath" else 20 * L


# ----------------------------------------------------------------------------
# loop representation


def _port(e, end, side):
    return 4 * e + 2 * end + side


def _outer_side(p: DiscretePolygon, e: int) -> int:
    if e < p.n_horizontal:
        return 0 if e // p.nx == 0 else 1
    k = e - p.n_horizontal
    return 0 if k % (p.nx + 1) == p.nx else 1


def _end_of(p: DiscretePolygon, e: int, v: int) -> int:
    return 0 if p.edge_endpoints[e, 0] == v else 1


def _free_positions(cfg: BondConfig):
    """Boundary positions with an outer corner, and the stub ports ``{port: mark}``."""
    p = cfg.polygon
    nb_ = p.n_boundary
    if cfg.wiring == "free":
        return np.arange(nb_), {}
    if cfg.wiring == "wired":
        return np.zeros(0, dtype=np.int64), {}
    inner, stubs = [], {}
    for k in range(1, p.n_marks + 1):
        if k % 2 == cfg.wired_parity:
            continue
        rng = p.arc_boundary_range(k)
        inner.extend(int(b) for b in rng[1:])
        first, last = int(rng[0]), int(rng[-1])
        e_first = int(p.boundary_edges[first])
        e_last = int(p.boundary_edges[last])
        v_start = int(p.boundary_vertices[first])
        v_end = int(p.boundary_vertices[(last + 1) % nb_])
        stubs[_port(e_first, _end_of(p, e_first, v_start), _outer_side(p, e_first))] = k
        stubs[_port(e_last, _end_of(p, e_last, v_end), _outer_side(p, e_last))] = k % p.n_marks + 1
    return np.asarray(inner, dtype=np.int64), stubs


def port_links(cfg: BondConfig):
    """``link[port]`` (``-1`` when the port has no corner) and the stub map."""
    p = cfg.polygon
    link = -np.ones(4 * p.n_edges, dtype=np.int64)

    def connect(v, e1, s1, e2, s2):
        a = _port(e1, _end_of(p, e1, v), s1)
        b = _port(e2, _end_of(p, e2, v), s2)
        link[a] = b
        link[b] = a

    for j in range(p.ny):
        for i in range(p.nx):
            bottom, right, top, left = p.cell_edges(i, j)
            bl, br, tr, tl = p.cell_corners(i, j)
            # side of the cell relative to each edge: above a bottom edge is 1,
            # below a top edge 0, right of a left edge 0, left of a right edge 1
            connect(bl, bottom, 1, left, 0)
            connect(br, bottom, 1, right, 1)
            connect(tr, top, 0, right, 1)
            connect(tl, top, 0, left, 0)
    positions, stubs = _free_positions(cfg)
    nb_ = p.n_boundary
    for b in positions:
        v = int(p.boundary_vertices[b])
        e_in = int(p.boundary_edges[(b - 1) % nb_])
        e_out = int(p.boundary_edges[b])
        connect(v, e_in, _outer_side(p, e_in), e_out, _outer_side(p, e_out))
    return link, stubs


def _partner(port: int, omega) -> int:
    e, r = divmod(port, 4)
    end, side = divmod(r, 2)
    if omega[e]:
        return _port(e, 1 - end, side)
    return _port(e, end, 1 - side)


@dataclass
class LoopDecomposition:
    interfaces: list
    loops: list
    n_medial_edges: int
    used_links: int


def trace_fk_interfaces(cfg: BondConfig) -> LoopDecomposition:
    if cfg.dual:
        raise ValueError("trace the primal configuration")
    p = cfg.polygon
    link, stubs = port_links(cfg)
    omega = cfg.omega
    used = np.zeros(len(link), dtype=bool)
    n_links = int((link >= 0).sum()) // 2

    def walk(start_port, stop_port=None):
        edges = [start_port // 4]
        P = start_port
        while True:
            Q = _partner(P, omega)
            if stop_port is not None and Q == stop_port:
                return edges, None
            nxt = link[Q]
            if nxt < 0:
                return edges, Q
            if used[Q]:
                raise TracingError("medial routing revisits a corner")
            used[Q] = used[nxt] = True
            P = int(nxt)
            edges.append(P // 4)
            if len(edges) > 4 * p.n_edges + 4:
                raise TracingError("medial routing does not terminate")

    interfaces = []
    for port, mark in sorted(stubs.items(), key=lambda kv: kv[1]):
        if cfg.wiring != "alternating" or mark % 2 == cfg.wired_parity:
            continue
        edges, end_port = walk(port)
        if end_port is None or end_port not in stubs:
            raise TracingError("interface does not end at a marked stub")
        arr = np.asarray(edges, dtype=np.int64)
        interfaces.append(InterfacePath(arr, p.edge_midpoint(arr), mark, stubs[end_port]))
    loops = []
    for Q0 in range(len(link)):
        if link[Q0] < 0 or used[Q0]:
            continue
        # start on the corner Q0 -> link[Q0] and come back to Q0
        used[Q0] = used[link[Q0]] = True
        P = int(link[Q0])
        edges, tail = walk(P, stop_port=Q0)
        if tail is not None:
            raise TracingError("open medial path found outside the interfaces")
        loops.append(np.asarray(edges, dtype=np.int64))
    used_links = int(used.sum()) // 2
    if used_links != n_links:
        raise TracingError("some medial edges are not covered")
    if cfg.wiring == "alternating":
        ends_ = sorted([q.start_mark for q in interfaces] + [q.end_mark for q in interfaces])
        if ends_ != list(range(1, p.n_marks + 1)):
            raise TracingError("interface endpoints do not exhaust the marks")
    return LoopDecomposition(interfaces, loops, n_links, used_links)


def classify_fk_pattern(decomp: LoopDecomposition) -> LinkPattern:
    try:
        return pattern_of_matching([(q.start_mark, q.end_mark) for q in decomp.interfaces])
    except NonPlanarError as exc:
        raise TracingError(f"traced interfaces are non-planar: {exc}") from exc


# ----------------------------------------------------------------------------
# duality and crossings


def dual_config(cfg: BondConfig) -> BondConfig:
    """``omega*(e*) = 1 - omega(e)`` with wired and free arcs exchanged."""
    status = np.where(cfg.status < 0, -1, 1 - cfg.status).astype(np.int8)
    wiring = {"free": "wired", "wired": "free"}.get(cfg.wiring, cfg.wiring)
    return BondConfig(cfg.polygon, (1 - cfg.omega).astype(np.uint8), status, cfg.q, dual_p(cfg.p, cfg.q),
                      wiring, 1 - cfg.wired_parity, not cfg.dual, cfg.seed, cfg.sweeps)


def has_open_crossing(cfg: BondConfig, region=None, direction: str = "horizontal") -> bool:
    """Open path inside ``region = (i0, i1, j0, j1)`` joining its opposite sides."""
    p = cfg.polygon
    i0, i1, j0, j1 = region if region is not None else (0, p.nx, 0, p.ny)
    ends = p.edge_endpoints
    xi, yj = p.vertex_coords(ends)
    inside = (xi >= i0).all(1) & (xi <= i1).all(1) & (yj >= j0).all(1) & (yj <= j1).all(1)
    omega = (cfg.omega.astype(bool) & inside).astype(np.uint8)
    lab = _labels(omega, ends, p.n_vertices)
    if direction == "horizontal":
        a = [p.vid(i0, j) for j in range(j0, j1 + 1)]
        b = [p.vid(i1, j) for j in range(j0, j1 + 1)]
    else:
        a = [p.vid(i, j0) for i in range(i0, i1 + 1)]
        b = [p.vid(i, j1) for i in range(i0, i1 + 1)]
    return bool(set(lab[a]) & set(lab[b]))


def has_dual_crossing(cfg: BondConfig, direction: str = "vertical") -> bool:
    """Dual-open path between the outer faces beyond two opposite sides."""
    p = cfg.polygon
    nc = p.n_cells
    A, B = nc, nc + 1
    parent = np.arange(nc + 2)
    bottom_top = direction == "vertical"
    for e in range(p.n_edges):
        if cfg.omega[e]:
            continue
        f1, f2 = p.edge_faces(e)
        faces = []
        for f in (f1, f2):
            if f < nc:
                faces.append(f)
                continue
            b = f - nc
            side = _boundary_side(p, b)
            if bottom_top and side in ("bottom", "top"):
                faces.append(A if side == "bottom" else B)
            elif not bottom_top and side in ("left", "right"):
                faces.append(A if side == "left" else B)
            else:
                faces = None
                break
        if faces is None:
            continue
        x, y = _find(parent, faces[0]), _find(parent, faces[1])
        parent[x] = y
    return _find(parent, A) == _find(parent, B)


def _boundary_side(p: DiscretePolygon, b: int) -> str:
    if b < p.nx:
        return "bottom"
    if b < p.nx + p.ny:
        return "right"
    if b < 2 * p.nx + p.ny:
        return "top"
    return "left"


# ----------------------------------------------------------------------------
# dumps


def dump_bonds(cfg: BondConfig, path) -> None:
    """Edge-indexed bitmap with the wiring spec as a JSON header line."""
    head = {"polygon": cfg.polygon.spec(), "q": cfg.q, "p": cfg.p, "wiring": cfg.wiring,
            "wired_parity": cfg.wired_parity, "dual": cfg.dual,
            "status": "".join("." if s < 0 else str(int(s)) for s in cfg.status)}
    Path(path).write_text(json.dumps(head, sort_keys=True) + "\n" + "".join(map(str, cfg.omega.tolist())) + "\n")


def load_bonds(path) -> BondConfig:
    head_line, bits = Path(path).read_text().splitlines()[:2]
    head = json.loads(head_line)
    spec = head["polygon"]
    poly = DiscretePolygon(spec["nx"], spec["ny"], spec["delta"], tuple(spec["mark_positions"]),
                           spec["ell"], tuple(spec["marks"] or ()))
    omega = np.array([int(c) for c in bits], dtype=np.uint8)
    status = np.array([-1 if c == "." else int(c) for c in head["status"]], dtype=np.int8)
    return BondConfig(poly, omega, status, head["q"], head["p"], head["wiring"], head["wired_parity"], head["dual"])
