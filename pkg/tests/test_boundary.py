from itertools import combinations

import numpy as np
import pytest

from rclattice.boundary import (
    BoundaryCondition,
    all_side_homogeneous,
    free,
    induced_condition,
    is_side_homogeneous,
    parse_bc,
    refines,
    side_homogeneous,
    wired,
)
from rclattice.lattice import build_lattice, rect_sides


@pytest.mark.parametrize("n, size", [(2, 4), (3, 8)])
def test_free_and_wired(n, size):
    lat = build_lattice(n)
    assert len(free(lat).blocks) == size
    assert all(len(b) == 1 for b in free(lat).blocks)
    assert len(wired(lat).blocks) == 1 and len(wired(lat).blocks[0]) == size


def test_side_homogeneous_extremes():
    lat = build_lattice(5)
    assert side_homogeneous(lat, ()) == free(lat)
    assert side_homogeneous(lat, (1, 2, 3, 4)) == wired(lat)
    with pytest.raises(ValueError):
        side_homogeneous(lat, (5,))


def test_sixteen_conditions():
    lat = build_lattice(4)
    family = all_side_homogeneous(lat)
    assert len(family) == 16
    assert len({bc for _, bc in family}) == 16
    assert all(is_side_homogeneous(lat, bc) for _, bc in family)


def test_not_side_homogeneous():
    lat = build_lattice(6)
    psi = BoundaryCondition.from_blocks(lat, [[lat.vid(2, 0), lat.vid(0, 3)],
                                              [lat.vid(3, 0), lat.vid(5, 3)]])
    assert not is_side_homogeneous(lat, psi)
    half = BoundaryCondition.from_blocks(lat, [[lat.vid(x, 0) for x in range(3)]])
    assert not is_side_homogeneous(lat, half)


def test_refines_examples():
    lat = build_lattice(4)
    for _, b in all_side_homogeneous(lat):
        assert refines(free(lat), b)
        assert refines(b, wired(lat))
    assert not refines(side_homogeneous(lat, (1, 2)), side_homogeneous(lat, (1,)))
    assert refines(side_homogeneous(lat, (1,)), side_homogeneous(lat, (1, 2)))
    with pytest.raises(ValueError):
        refines(free(lat), free(build_lattice(5)))


def test_refinement_is_a_partial_order():
    lat = build_lattice(4)
    bcs = [bc for _, bc in all_side_homogeneous(lat)]
    for a in bcs:
        assert refines(a, a)
        for b in bcs:
            if a != b and refines(a, b):
                assert not refines(b, a)
            for c in bcs:
                if refines(a, b) and refines(b, c):
                    assert refines(a, c)


def test_from_blocks_rejects_interior_and_overlap():
    lat = build_lattice(4)
    with pytest.raises(ValueError):
        BoundaryCondition.from_blocks(lat, [[lat.vid(1, 1), 0]])
    with pytest.raises(ValueError):
        BoundaryCondition.from_blocks(lat, [[0, 1], [1, 2]])


def test_parse_bc_forms():
    lat = build_lattice(4)
    assert parse_bc(lat, "free") == free(lat)
    assert parse_bc(lat, "wired") == wired(lat)
    assert parse_bc(lat, {"sides": [1]}) == side_homogeneous(lat, [1])
    bc = parse_bc(lat, {"blocks": [[[0, 0], [3, 3]]]})
    assert bc.wired_blocks == ((0, 15),)
    assert parse_bc(lat, bc.to_json(lat)) == bc
    with pytest.raises(ValueError):
        parse_bc(lat, "periodic")
    with pytest.raises(ValueError):
        parse_bc(lat, {"blocks": [[[0, 0], [9, 9]]]})


def _interior_region(lat):
    return {lat.vid(x, y) for x in range(1, lat.n - 1) for y in range(1, lat.n - 1)}


def test_induced_all_closed_free():
    lat = build_lattice(6)
    ind = induced_condition(lat, _interior_region(lat), np.zeros(lat.num_edges, bool), free(lat))
    assert all(len(b) == 1 for b in ind.blocks)


def test_induced_all_open_free():
    lat = build_lattice(6)
    region = _interior_region(lat)
    ind = induced_condition(lat, region, np.ones(lat.num_edges, bool), free(lat))
    assert len(ind.blocks) == 1
    assert set(ind.blocks[0]) == set(ind.domain)
    assert ind.is_side_homogeneous(rect_sides(1, 4, 1, 4, 6))
    half = induced_condition(lat, region, np.zeros(lat.num_edges, bool), free(lat))
    assert half.is_side_homogeneous(rect_sides(1, 4, 1, 4, 6))


def test_induced_wired_corner_region():
    lat = build_lattice(6)
    # a 3x3 block in the bottom-left corner touches sides 3 and 4
    region = {lat.vid(x, y) for x in range(3) for y in range(3)}
    ind = induced_condition(lat, region, np.zeros(lat.num_edges, bool), wired(lat))
    on_box = set(region) & set(lat.boundary)
    assert set(ind.wired_blocks[0]) == on_box and len(ind.wired_blocks) == 1
    others = set(ind.domain) - on_box
    assert others == {lat.vid(2, 1), lat.vid(2, 2), lat.vid(1, 2)}
    assert all(len(b) == 1 for b in ind.blocks if b[0] in others)


def test_induced_side_homogeneous_outer_preserved():
    # wired outer bc with every outside edge open: all of the region boundary joined
    lat = build_lattice(5)
    region = {lat.vid(x, y) for x in range(1, 4) for y in range(0, 3)}
    ind = induced_condition(lat, region, np.ones(lat.num_edges, bool), wired(lat))
    assert len(ind.blocks) == 1
