"""Geometry of the n x n box of the square lattice.

Vertices are ``(x, y)`` with ``0 <= x, y < n`` and vertex id ``y * n + x``.
Edge indices are a serialization contract: horizontal edges row-major first,
then vertical edges row-major.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import hypot

import numpy as np

# Side order is part of the serialization contract: top, right, bottom, left.
SIDE_NAMES = ("top", "right", "bottom", "left")


def rect_sides(x0: int, x1: int, y0: int, y1: int, n: int) -> tuple[tuple[int, ...], ...]:
    """Vertex ids on the four sides of the rectangle [x0, x1] x [y0, y1]."""
    top = tuple(y1 * n + x for x in range(x0, x1 + 1))
    right = tuple(y * n + x1 for y in range(y0, y1 + 1))
    bottom = tuple(y0 * n + x for x in range(x0, x1 + 1))
    left = tuple(y * n + x0 for y in range(y0, y1 + 1))
    return top, right, bottom, left


@dataclass(frozen=True)
class Lattice:
    n: int

    def vid(self, x: int, y: int) -> int:
        return y * self.n + x

    def coord(self, v: int) -> tuple[int, int]:
        return v % self.n, v // self.n

    @property
    def num_vertices(self) -> int:
        return self.n * self.n

    @property
    def num_edges(self) -> int:
        return 2 * self.n * (self.n - 1)

    @cached_property
    def vertices(self) -> tuple[tuple[int, int], ...]:
        return tuple(self.coord(v) for v in range(self.num_vertices))

    @cached_property
    def edges(self) -> np.ndarray:
        """(m, 2) array of endpoint vertex ids, lower id first."""
        n = self.n
        out = np.empty((self.num_edges, 2), dtype=np.int64)
        k = 0
        for y in range(n):
            for x in range(n - 1):
                out[k] = (y * n + x, y * n + x + 1)
                k += 1
        for y in range(n - 1):
            for x in range(n):
                out[k] = (y * n + x, (y + 1) * n + x)
                k += 1
        out.setflags(write=False)
        return out

    @cached_property
    def _edge_lookup(self) -> dict[tuple[int, int], int]:
        return {(int(a), int(b)): i for i, (a, b) in enumerate(self.edges)}

    def edge_index(self, u: tuple[int, int], v: tuple[int, int]) -> int:
        a, b = sorted((self.vid(*u), self.vid(*v)))
        try:
            return self._edge_lookup[(a, b)]
        except KeyError:
            raise ValueError(f"{u} and {v} are not adjacent in the {self.n}-box") from None

    def edge_coords(self, e: int) -> tuple[tuple[int, int], tuple[int, int]]:
        a, b = self.edges[e]
        return self.coord(int(a)), self.coord(int(b))

    @cached_property
    def sides(self) -> tuple[tuple[int, ...], ...]:
        return rect_sides(0, self.n - 1, 0, self.n - 1, self.n)

    @cached_property
    def boundary(self) -> tuple[int, ...]:
        return tuple(sorted(set().union(*self.sides)))

    @cached_property
    def boundary_edges(self) -> tuple[int, ...]:
        """Edges with both endpoints on the boundary (the outer cycle)."""
        on = set(self.boundary)
        n = self.n

        def along_side(a: int, b: int) -> bool:
            (xa, ya), (xb, yb) = self.coord(a), self.coord(b)
            return (ya == yb and ya in (0, n - 1)) or (xa == xb and xa in (0, n - 1))

        return tuple(
            i for i, (a, b) in enumerate(self.edges)
            if a in on and b in on and along_side(int(a), int(b))
        )

    def degree(self, v: int) -> int:
        x, y = self.coord(v)
        return sum(0 <= x + dx < self.n and 0 <= y + dy < self.n
                   for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)))

    def neighbors(self, v: int) -> list[int]:
        x, y = self.coord(v)
        return [self.vid(x + dx, y + dy) for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))
                if 0 <= x + dx < self.n and 0 <= y + dy < self.n]

    def distance_to_edge(self, e: int, v: int) -> float:
        """Euclidean distance from v to the nearer endpoint of e."""
        (xa, ya), (xb, yb) = self.edge_coords(e)
        x, y = self.coord(v)
        return min(hypot(x - xa, y - ya), hypot(x - xb, y - yb))

    def graph(self, bc=None):
        """The box as an :class:`~rclattice.graph.RcGraph`, wired per ``bc``."""
        from .graph import RcGraph

        blocks = () if bc is None else bc.wired_blocks
        if bc is not None and bc.n != self.n:
            raise ValueError(f"boundary condition is for n={bc.n}, lattice has n={self.n}")
        return RcGraph(self.num_vertices, self.edges, blocks)


def build_lattice(n: int) -> Lattice:
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ValueError(f"invalid box size n={n!r}; need an integer n >= 2")
    return Lattice(int(n))


@dataclass(frozen=True)
class BoxRegion:
    n: int
    center_edge: int
    radius: int
    x_range: tuple[int, int]
    y_range: tuple[int, int]
    vertices: frozenset[int]
    inner_edges: tuple[int, ...]
    outer_edges: tuple[int, ...]
    inner_boundary: tuple[int, ...]

    @property
    def region_boundary(self) -> tuple[int, ...]:
        """Vertices on the rectangle's perimeter: the domain of induced conditions."""
        (x0, x1), (y0, y1) = self.x_range, self.y_range
        return tuple(sorted(
            v for v in self.vertices
            if (v % self.n) in (x0, x1) or (v // self.n) in (y0, y1)
        ))

    def sides(self) -> tuple[tuple[int, ...], ...]:
        (x0, x1), (y0, y1) = self.x_range, self.y_range
        return rect_sides(x0, x1, y0, y1, self.n)


def box_region(lat: Lattice, e: int, r: int) -> BoxRegion:
    """The box around edge ``e`` with margin ``r`` on every side, clipped to the lattice.

    Vertices left out are at distance greater than ``r`` from both endpoints.
    """
    if not 0 <= e < lat.num_edges:
        raise ValueError(f"edge index {e} out of range for n={lat.n}")
    if r < 1:
        raise ValueError(f"radius must be >= 1, got {r}")
    (xa, ya), (xb, yb) = lat.edge_coords(e)
    n = lat.n
    x0, x1 = max(min(xa, xb) - r, 0), min(max(xa, xb) + r, n - 1)
    y0, y1 = max(min(ya, yb) - r, 0), min(max(ya, yb) + r, n - 1)
    verts = frozenset(y * n + x for y in range(y0, y1 + 1) for x in range(x0, x1 + 1))
    inner, outer = [], []
    for i, (a, b) in enumerate(lat.edges):
        (inner if (a in verts and b in verts) else outer).append(i)
    inner_boundary = tuple(sorted(
        v for v in verts if any(w not in verts for w in lat.neighbors(v))
    ))
    return BoxRegion(n, e, r, (x0, x1), (y0, y1), verts, tuple(inner), tuple(outer), inner_boundary)


@dataclass(frozen=True)
class DualGraph:
    """Planar dual of the box: one vertex per bounded face plus the outer vertex.

    Face ``(i, j)`` (lower-left corner at primal ``(i, j)``) has id ``j * (n-1) + i``;
    the outer vertex has id ``(n-1)**2``.  Dual edge ``k`` crosses primal edge ``k``.
    """

    n: int
    edges: np.ndarray

    @property
    def num_vertices(self) -> int:
        return (self.n - 1) ** 2 + 1

    @property
    def outer(self) -> int:
        return (self.n - 1) ** 2

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def to_dual(self, e: int) -> int:
        return e

    def to_primal(self, k: int) -> int:
        return k

    @property
    def primal_map(self) -> np.ndarray:
        return np.arange(self.num_edges)

    def graph(self):
        from .graph import RcGraph

        return RcGraph(self.num_vertices, self.edges, ())


def build_dual(lat: Lattice) -> DualGraph:
    n = lat.n
    outer = (n - 1) ** 2

    def face(i: int, j: int) -> int:
        if 0 <= i <= n - 2 and 0 <= j <= n - 2:
            return j * (n - 1) + i
        return outer

    out = np.empty((lat.num_edges, 2), dtype=np.int64)
    for k, (a, b) in enumerate(lat.edges):
        (xa, ya), (xb, yb) = lat.coord(int(a)), lat.coord(int(b))
        if ya == yb:  # horizontal: faces below and above
            out[k] = (face(xa, ya - 1), face(xa, ya))
        else:  # vertical: faces left and right
            out[k] = (face(xa - 1, ya), face(xa, ya))
    out.setflags(write=False)
    return DualGraph(n, out)
