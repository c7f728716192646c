import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from globalsle.errors import ResolutionError
from globalsle.lattice import DiscretePolygon, build_rectangle, medial_graph, square_marks_midpoints


def test_unit_square_with_corner_marks():
    p = build_rectangle(1.0, 0.25, (0.0, 0.25, 0.5, 0.75))
    assert p.n_cells == 16
    assert p.marks == (0, 4, 8, 12)
    corners = [p.vertex_coords(p.mark_vertex(k)) for k in range(1, 5)]
    assert [(int(i), int(j)) for i, j in corners] == [(0, 0), (4, 0), (4, 4), (0, 4)]


def test_refinement_doubles_arcs():
    marks = (0.1, 0.35, 0.6, 0.85)
    coarse = build_rectangle(1.5, 1 / 8, marks)
    fine = build_rectangle(1.5, 1 / 16, marks)
    for k in range(1, 5):
        a, b = len(coarse.arc_boundary_range(k)), len(fine.arc_boundary_range(k))
        assert abs(b - 2 * a) <= 1


def test_snap_collision():
    with pytest.raises(ResolutionError):
        build_rectangle(1.0, 0.25, (0.10, 0.11))
    with pytest.raises(ValueError):
        DiscretePolygon(4, 4, 0.25, (5, 2, 9))


def test_tie_breaks_counterclockwise():
    # perimeter 16 boundary positions; 1/32 sits halfway between positions 0 and 1
    p = build_rectangle(1.0, 0.25, (1 / 32, 0.5))
    assert p.marks[0] == 1


def test_single_cell_medial_diamond():
    p = DiscretePolygon(1, 1, 1.0)
    m = medial_graph(p)
    assert m.n_vertices == 4
    assert sorted(map(tuple, np.sort(m.corner_edges, axis=1).tolist())) == [(0, 2), (0, 3), (1, 2), (1, 3)]
    # each medial vertex has degree two in a single cell
    assert all(len(a) == 2 for a in m.adjacency())


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7))
def test_counts_and_euler(nx, ny):
    p = DiscretePolygon(nx, ny, 1.0 / max(nx, ny))
    assert p.euler_characteristic() == 2
    assert medial_graph(p).n_vertices == p.n_edges
    # every interior medial vertex has degree four, boundary ones degree two
    deg = np.array([len(a) for a in medial_graph(p).adjacency()])
    assert np.all(deg[p.is_boundary_edge] == 2) and np.all(deg[~p.is_boundary_edge] == 4)
    assert len(p.boundary_vertices) == len(set(p.boundary_vertices.tolist())) == p.n_boundary
    ends = p.edge_endpoints
    bv = p.boundary_vertices
    for b, e in enumerate(p.boundary_edges):
        assert set(ends[e]) == {bv[b], bv[(b + 1) % p.n_boundary]}


def test_dual_round_trip():
    p = DiscretePolygon(5, 5, 0.2)
    for e in range(p.n_edges):
        f1, f2 = p.edge_faces(e)
        assert f1 != f2
        assert p.primal_edge_of_dual(f1, f2) == e
    # every cell is a dual vertex of degree four
    counts = np.zeros(p.n_cells + p.n_boundary, dtype=int)
    for e in range(p.n_edges):
        for f in p.edge_faces(e):
            counts[f] += 1
    assert np.all(counts[:p.n_cells] == 4) and np.all(counts[p.n_cells:] == 1)


def test_arcs_partition_boundary():
    p = build_rectangle(2.0, 0.125, (0.05, 0.2, 0.45, 0.7, 0.8, 0.95))
    lengths = [len(p.arc_boundary_range(k)) for k in range(1, 7)]
    assert sum(lengths) == p.n_boundary
    arc = p.arc_of_boundary_position()
    assert np.all(arc >= 1)
    for k in range(1, 7):
        verts = p.arc_vertices(k)
        assert verts[0] == p.mark_vertex(k) and verts[-1] == p.mark_vertex(k % 6 + 1)
        assert len(p.arc_edges(k)) == lengths[k - 1]


def test_cell_geometry():
    p = DiscretePolygon(3, 2, 0.5)
    bottom, right, top, left = p.cell_edges(1, 1)
    corners = p.cell_corners(1, 1)
    ends = p.edge_endpoints
    for s, e in enumerate((bottom, right, top, left)):
        assert set(ends[e]) == {corners[s], corners[(s + 1) % 4]}
    nbr, ned = p.neighbors
    for v in range(p.n_vertices):
        for w, e in zip(nbr[v], ned[v]):
            if w >= 0:
                assert set(ends[e]) == {v, w}
                assert abs(p.vertex_point(v) - p.vertex_point(w)) == pytest.approx(0.5)


def test_square_midpoints_and_spec():
    s = square_marks_midpoints(1.0)
    assert s == (0.125, 0.625)
    p = build_rectangle(1.0, 1 / 8, s)
    assert [tuple(map(int, p.vertex_coords(p.mark_vertex(k)))) for k in (1, 2)] == [(4, 0), (4, 8)]
    spec = p.spec()
    assert spec["marks"] == [0.125, 0.625] and spec["delta"] == 0.125
