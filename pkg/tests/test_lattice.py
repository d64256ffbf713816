import numpy as np
import pytest

from rclattice.lattice import box_region, build_dual, build_lattice


@pytest.mark.parametrize("n", range(2, 17))
def test_counts_and_degrees(n):
    lat = build_lattice(n)
    assert lat.num_vertices == n * n
    assert lat.num_edges == len(lat.edges) == 2 * n * (n - 1)
    corners = {lat.vid(0, 0), lat.vid(n - 1, 0), lat.vid(0, n - 1), lat.vid(n - 1, n - 1)}
    bd = set(lat.boundary)
    deg = np.bincount(lat.edges.ravel(), minlength=lat.num_vertices)
    for v in range(lat.num_vertices):
        want = 2 if v in corners else (3 if v in bd else 4)
        assert deg[v] == want == lat.degree(v)


def test_small_boxes():
    lat = build_lattice(2)
    assert (lat.num_vertices, lat.num_edges, len(lat.boundary)) == (4, 4, 4)
    lat = build_lattice(3)
    assert (lat.num_vertices, lat.num_edges, len(lat.boundary)) == (9, 12, 8)


def test_sides_and_corners():
    lat = build_lattice(4)
    assert all(len(s) == 4 for s in lat.sides)
    hits = {}
    for s in lat.sides:
        for v in s:
            hits[v] = hits.get(v, 0) + 1
    assert set(hits) == set(lat.boundary)
    assert sorted(v for v, k in hits.items() if k == 2) == [0, 3, 12, 15]
    # top, right, bottom, left
    assert lat.sides[0] == (12, 13, 14, 15)
    assert lat.sides[1] == (3, 7, 11, 15)
    assert lat.sides[2] == (0, 1, 2, 3)
    assert lat.sides[3] == (0, 4, 8, 12)


def test_edge_order_contract():
    lat = build_lattice(3)
    # horizontal edges row-major, then vertical edges row-major
    assert lat.edges[:6].tolist() == [[0, 1], [1, 2], [3, 4], [4, 5], [6, 7], [7, 8]]
    assert lat.edges[6:].tolist() == [[0, 3], [1, 4], [2, 5], [3, 6], [4, 7], [5, 8]]
    for e in range(lat.num_edges):
        u, v = lat.edge_coords(e)
        assert lat.edge_index(u, v) == lat.edge_index(v, u) == e
    with pytest.raises(ValueError):
        lat.edge_index((0, 0), (1, 1))


def test_invalid_size():
    for n in (0, 1, -3):
        with pytest.raises(ValueError):
            build_lattice(n)


def test_central_box_margin_two():
    lat = build_lattice(9)
    e = lat.edge_index((4, 4), (5, 4))
    box = box_region(lat, e, 2)
    assert box.x_range == (2, 7) and box.y_range == (2, 6)
    assert len(box.vertices) == 30
    assert lat.boundary and not (box.vertices & set(lat.boundary))
    for v in range(lat.num_vertices):
        if v not in box.vertices:
            assert lat.distance_to_edge(e, v) > 2


def test_box_clipped_at_corner():
    lat = build_lattice(5)
    box = box_region(lat, lat.edge_index((0, 0), (1, 0)), 3)
    assert box.vertices & set(lat.boundary)
    assert box.x_range == (0, 4) and box.y_range == (0, 3)


def test_box_saturates():
    lat = build_lattice(5)
    for e in range(lat.num_edges):
        box = box_region(lat, e, 10)
        assert len(box.vertices) == 25 and box.outer_edges == ()


def test_box_partition_and_monotone():
    lat = build_lattice(8)
    for e in range(0, lat.num_edges, 7):
        prev = None
        for r in range(1, 6):
            box = box_region(lat, e, r)
            assert sorted(box.inner_edges + box.outer_edges) == list(range(lat.num_edges))
            assert not set(box.inner_edges) & set(box.outer_edges)
            for v in box.inner_boundary:
                assert any(w not in box.vertices for w in lat.neighbors(v))
            if prev is not None:
                assert prev.vertices <= box.vertices
                assert set(prev.inner_edges) <= set(box.inner_edges)
            prev = box


def test_box_rejects_bad_input():
    lat = build_lattice(4)
    with pytest.raises(ValueError):
        box_region(lat, lat.num_edges, 1)
    with pytest.raises(ValueError):
        box_region(lat, 0, 0)


def test_dual_small():
    d = build_dual(build_lattice(2))
    assert d.num_vertices == 2 and d.num_edges == 4
    # a four-fold multi-edge between the single face and the outer vertex
    assert all(sorted(map(int, ed)) == [0, 1] for ed in d.edges)
    d3 = build_dual(build_lattice(3))
    assert d3.num_vertices == 5 and d3.num_edges == 12
    for e in range(12):
        assert d3.to_primal(d3.to_dual(e)) == e


@pytest.mark.parametrize("n", range(2, 9))
def test_dual_structure(n):
    lat = build_lattice(n)
    d = build_dual(lat)
    assert d.num_edges == lat.num_edges
    assert d.num_vertices == (n - 1) ** 2 + 1
    # Euler: faces including the outer one
    assert d.num_vertices == lat.num_edges - lat.num_vertices + 2
    for e in lat.boundary_edges:
        assert d.outer in map(int, d.edges[e])
    for e in range(lat.num_edges):
        if e not in lat.boundary_edges:
            assert d.outer not in map(int, d.edges[e])
