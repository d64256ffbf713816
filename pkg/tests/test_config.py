import numpy as np
import pytest

from conftest import ref_components, ref_connected
from rclattice.boundary import BoundaryCondition, free, side_homogeneous, wired
from rclattice.config import RcConfig, components, connected, gamma_region, is_cut_edge
from rclattice.lattice import box_region, build_lattice


def test_component_examples():
    lat = build_lattice(2)
    empty = RcConfig.empty(lat.num_edges)
    assert components(lat, empty, free(lat)).component_count == 4
    assert components(lat, empty, wired(lat)).component_count == 1
    lat3 = build_lattice(3)
    view = components(lat3, RcConfig.empty(12), side_homogeneous(lat3, {1}))
    assert view.component_count == 7


def test_cut_edge_examples():
    lat = build_lattice(2)
    m = lat.num_edges
    for e in range(m):
        assert is_cut_edge(lat, RcConfig.empty(m), free(lat), e)
        assert not is_cut_edge(lat, RcConfig.full(m), free(lat), e)
        assert not is_cut_edge(lat, RcConfig.empty(m), wired(lat), e)
    with pytest.raises(ValueError):
        is_cut_edge(lat, RcConfig.empty(m), free(lat), m)


def _random_bc(lat, rng):
    bd = list(lat.boundary)
    rng.shuffle(bd)
    k = int(rng.integers(1, 4))
    cuts = sorted(rng.choice(np.arange(1, len(bd)), size=k, replace=False))
    return BoundaryCondition.from_blocks(lat, np.split(np.array(bd), cuts))


def test_components_and_cut_edges_match_bfs(rng):
    for _ in range(300):
        n = int(rng.integers(2, 6))
        lat = build_lattice(n)
        bc = _random_bc(lat, rng)
        bits = rng.random(lat.num_edges) < rng.random()
        c = ref_components(lat.num_vertices, lat.edges, bits, bc.wired_blocks)
        assert components(lat, bits, bc).component_count == c
        e = int(rng.integers(lat.num_edges))
        on, off = bits.copy(), bits.copy()
        on[e], off[e] = True, False
        flips = ref_components(lat.num_vertices, lat.edges, on, bc.wired_blocks) != \
            ref_components(lat.num_vertices, lat.edges, off, bc.wired_blocks)
        assert is_cut_edge(lat, bits, bc, e) == flips


def test_connected_examples(rng):
    lat = build_lattice(4)
    empty = RcConfig.empty(lat.num_edges)
    assert connected(lat, empty, free(lat), 5, 5)
    assert not connected(lat, empty, free(lat), 0, 1)
    assert connected(lat, empty, wired(lat), (0, 0), (3, 3))
    bits = rng.random(lat.num_edges) < 0.5
    for u in range(16):
        for v in range(16):
            assert connected(lat, bits, free(lat), u, v) == \
                ref_connected(16, lat.edges, bits, (), u, v)


def test_config_roundtrips(rng):
    for n in (2, 3, 7):
        m = 2 * n * (n - 1)
        cfg = RcConfig(rng.random(m) < 0.5)
        assert RcConfig.from_hex(cfg.to_hex(n)) == cfg
        assert RcConfig.from_mask(cfg.to_mask(), m) == cfg
    cfg = RcConfig.from_edges(12, [0, 5])
    assert cfg.open_edges == {0, 5} and len(cfg) == 2
    assert cfg.toggled(5) == RcConfig.from_edges(12, [0])
    assert cfg <= RcConfig.full(12) and not RcConfig.full(12) <= cfg
    assert cfg.hamming(RcConfig.empty(12)) == 2
    with pytest.raises(ValueError):
        RcConfig.from_hex("2:ff")


def test_gamma_region_extremes():
    lat = build_lattice(9)
    box = box_region(lat, lat.edge_index((4, 4), (5, 4)), 2)
    closed = gamma_region(lat, RcConfig.empty(lat.num_edges), box)
    assert closed == box.vertices - set(box.inner_boundary)
    assert gamma_region(lat, RcConfig.full(lat.num_edges), box) == frozenset()


def test_gamma_region_single_path():
    lat = build_lattice(9)
    box = box_region(lat, lat.edge_index((4, 4), (5, 4)), 2)
    path = [(2, 4), (3, 4), (4, 4), (4, 5)]
    cfg = RcConfig.from_edges(lat.num_edges, [lat.edge_index(a, b) for a, b in zip(path, path[1:])])
    got = gamma_region(lat, cfg, box)
    excluded = set(box.inner_boundary) | {lat.vid(*xy) for xy in path}
    assert got == box.vertices - excluded


def test_gamma_region_anti_monotone(rng):
    lat = build_lattice(8)
    box = box_region(lat, lat.edge_index((3, 3), (4, 3)), 2)
    for _ in range(50):
        a = rng.random(lat.num_edges) < 0.4
        b = a | (rng.random(lat.num_edges) < 0.2)
        assert gamma_region(lat, b, box) <= gamma_region(lat, a, box)
