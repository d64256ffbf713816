"""Boundary conditions as partitions of the boundary vertex set."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

import numpy as np

from .lattice import Lattice, rect_sides

Blocks = tuple[tuple[int, ...], ...]


def canonical_blocks(blocks: Iterable[Iterable[int]]) -> Blocks:
    """Sort members within blocks and blocks by least member."""
    return tuple(sorted((tuple(sorted(int(v) for v in b)) for b in blocks), key=lambda b: b[0]))


def _check_partition(blocks: Blocks, domain: Iterable[int]) -> None:
    seen: set[int] = set()
    for b in blocks:
        if not b:
            raise ValueError("empty block in partition")
        for v in b:
            if v in seen:
                raise ValueError(f"vertex {v} appears in two blocks")
            seen.add(v)
    if seen != set(domain):
        missing = set(domain) - seen
        extra = seen - set(domain)
        raise ValueError(f"partition does not cover the boundary exactly "
                         f"(missing {sorted(missing)[:5]}, extra {sorted(extra)[:5]})")


@dataclass(frozen=True)
class BoundaryCondition:
    """A partition of the boundary of the n-box, in canonical form."""

    n: int
    blocks: Blocks

    @classmethod
    def from_blocks(cls, lat: Lattice, blocks: Iterable[Iterable[int]]) -> BoundaryCondition:
        """Build from possibly partial blocks; uncovered boundary vertices become singletons."""
        given = [tuple(b) for b in blocks if len(tuple(b))]
        covered = {v for b in given for v in b}
        if not covered <= set(lat.boundary):
            raise ValueError(f"non-boundary vertices in blocks: {sorted(covered - set(lat.boundary))}")
        rest = [(v,) for v in lat.boundary if v not in covered]
        blocks_c = canonical_blocks(given + rest)
        _check_partition(blocks_c, lat.boundary)
        return cls(lat.n, blocks_c)

    @property
    def wired_blocks(self) -> Blocks:
        return tuple(b for b in self.blocks if len(b) > 1)

    def block_of(self) -> dict[int, int]:
        return {v: i for i, b in enumerate(self.blocks) for v in b}

    def to_json(self, lat: Lattice) -> dict:
        return {"blocks": [[list(lat.coord(v)) for v in b] for b in self.wired_blocks]}


def free(lat: Lattice) -> BoundaryCondition:
    return BoundaryCondition(lat.n, tuple((v,) for v in lat.boundary))


def wired(lat: Lattice) -> BoundaryCondition:
    return BoundaryCondition(lat.n, (tuple(lat.boundary),))


def side_homogeneous(lat: Lattice, kappa: Iterable[int]) -> BoundaryCondition:
    """Wire together the union of sides ``kappa`` (1=top, 2=right, 3=bottom, 4=left)."""
    kappa = sorted(set(kappa))
    if any(j not in (1, 2, 3, 4) for j in kappa):
        raise ValueError(f"sides must be in 1..4, got {kappa}")
    block = sorted(set().union(*(lat.sides[j - 1] for j in kappa))) if kappa else []
    return BoundaryCondition.from_blocks(lat, [block] if len(block) > 1 else [])


def all_side_homogeneous(lat: Lattice) -> list[tuple[tuple[int, ...], BoundaryCondition]]:
    """(kappa, condition) for all 16 subsets of sides."""
    return [(kappa, side_homogeneous(lat, kappa))
            for k in range(5) for kappa in combinations((1, 2, 3, 4), k)]


def _side_homogeneous_blocks(blocks: Blocks, sides: tuple[tuple[int, ...], ...]) -> bool:
    big = [b for b in blocks if len(b) > 1]
    if len(big) > 1:
        return False
    if not big:
        return True
    block = set(big[0])
    covered = set().union(*(s for s in sides if set(s) <= block))
    return covered == block


def is_side_homogeneous(lat: Lattice, bc: BoundaryCondition) -> bool:
    if bc.n != lat.n:
        raise ValueError("lattice mismatch")
    return _side_homogeneous_blocks(bc.blocks, lat.sides)


def refines(a: BoundaryCondition, b: BoundaryCondition) -> bool:
    """True iff every block of ``a`` lies inside a block of ``b``."""
    if a.n != b.n:
        raise ValueError(f"lattice mismatch: n={a.n} vs n={b.n}")
    where = b.block_of()
    return all(len({where[v] for v in blk}) == 1 for blk in a.blocks)


@dataclass(frozen=True)
class InducedCondition:
    """Wirings induced on a region's boundary by the configuration outside it."""

    region: frozenset[int]
    domain: tuple[int, ...]
    blocks: Blocks

    @property
    def wired_blocks(self) -> Blocks:
        return tuple(b for b in self.blocks if len(b) > 1)

    def is_side_homogeneous(self, sides: tuple[tuple[int, ...], ...]) -> bool:
        return _side_homogeneous_blocks(self.blocks, sides)


def region_boundary(lat: Lattice, region: Iterable[int]) -> tuple[int, ...]:
    """Vertices of the region adjacent to its complement or on the box boundary."""
    region = set(region)
    on_box = set(lat.boundary)
    return tuple(sorted(
        v for v in region
        if v in on_box or any(w not in region for w in lat.neighbors(v))
    ))


def induced_condition(lat: Lattice, region: Iterable[int], outside_config,
                      outer_bc: BoundaryCondition) -> InducedCondition:
    """Partition of the region's boundary by connections outside the region.

    Only edges not having both endpoints in ``region`` are consulted; outer wirings
    merge clusters transitively.
    """
    from .graph import union_find_labels

    region = frozenset(int(v) for v in region)
    if not region <= set(range(lat.num_vertices)):
        raise ValueError("region contains vertices outside the box")
    bits = np.asarray(getattr(outside_config, "bits", outside_config), dtype=bool)
    edges = lat.edges
    inside = np.array([a in region and b in region for a, b in edges], dtype=bool)
    usable = bits & ~inside
    labels = union_find_labels(lat.num_vertices, edges, usable, outer_bc.wired_blocks)
    domain = region_boundary(lat, region)
    groups: dict[int, list[int]] = {}
    for v in domain:
        groups.setdefault(int(labels[v]), []).append(v)
    return InducedCondition(region, domain, canonical_blocks(groups.values()))


def box_sides(lat: Lattice, box) -> tuple[tuple[int, ...], ...]:
    (x0, x1), (y0, y1) = box.x_range, box.y_range
    return rect_sides(x0, x1, y0, y1, lat.n)


def parse_bc(lat: Lattice, spec) -> BoundaryCondition:
    """Parse ``"free"``, ``"wired"``, ``{"sides": [...]}`` or ``{"blocks": [[[x, y], ...], ...]}``."""
    if isinstance(spec, BoundaryCondition):
        return spec
    if spec in ("free", None):
        return free(lat)
    if spec == "wired":
        return wired(lat)
    if isinstance(spec, dict):
        if set(spec) == {"sides"}:
            return side_homogeneous(lat, spec["sides"])
        if set(spec) == {"blocks"}:
            blocks = []
            for blk in spec["blocks"]:
                ids = []
                for xy in blk:
                    x, y = int(xy[0]), int(xy[1])
                    if not (0 <= x < lat.n and 0 <= y < lat.n):
                        raise ValueError(f"vertex {(x, y)} outside the {lat.n}-box")
                    ids.append(lat.vid(x, y))
                blocks.append(ids)
            return BoundaryCondition.from_blocks(lat, blocks)
    raise ValueError(f"unrecognised boundary condition spec: {spec!r}")
