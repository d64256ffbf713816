"""Finite multigraphs with a wiring partition, compiled for the kernels.

The box with a boundary condition, the planar dual, the wired dual box and the
region left after clamping edges are all instances of :class:`RcGraph`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from . import _kernels as K


def wire_parent(num_vertices: int, blocks: Iterable[Iterable[int]]) -> np.ndarray:
    """Parent array with every block pointed at its least member."""
    parent = np.arange(num_vertices, dtype=np.int64)
    for b in blocks:
        b = sorted(int(v) for v in b)
        parent[b] = b[0]
    return parent


def union_find_labels(num_vertices: int, edges: np.ndarray, bits: np.ndarray,
                      blocks: Iterable[Iterable[int]] = ()) -> np.ndarray:
    """Least-member component label of every vertex under open ``bits`` and wiring."""
    edges = np.asarray(edges, dtype=np.int64)
    out = np.empty(num_vertices, dtype=np.int64)
    K.labels(num_vertices, np.ascontiguousarray(edges[:, 0]), np.ascontiguousarray(edges[:, 1]),
             np.ascontiguousarray(bits, dtype=np.bool_), wire_parent(num_vertices, blocks), out)
    return out


class Workspace:
    """Scratch buffers for the bidirectional search; one per thread of control."""

    def __init__(self, num_nodes: int):
        self.mark_a = np.zeros(num_nodes, dtype=np.int64)
        self.mark_b = np.zeros(num_nodes, dtype=np.int64)
        self.gen = np.zeros(1, dtype=np.int64)
        self.qa = np.empty(num_nodes, dtype=np.int64)
        self.qb = np.empty(num_nodes, dtype=np.int64)

    def args(self) -> tuple:
        return self.mark_a, self.mark_b, self.gen, self.qa, self.qb


@dataclass(frozen=True, eq=False)
class RcGraph:
    num_vertices: int
    edges: np.ndarray
    blocks: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= self.num_vertices):
            raise ValueError("edge endpoint out of range")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "blocks", tuple(tuple(sorted(int(v) for v in b))
                                                 for b in self.blocks if len(b) > 1))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def ea(self) -> np.ndarray:
        return np.ascontiguousarray(self.edges[:, 0])

    @cached_property
    def eb(self) -> np.ndarray:
        return np.ascontiguousarray(self.edges[:, 1])

    @cached_property
    def wire_parent(self) -> np.ndarray:
        return wire_parent(self.num_vertices, self.blocks)

    @property
    def num_nodes(self) -> int:
        return self.num_vertices + len(self.blocks)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(ptr, neighbour, edge id) over real vertices plus one virtual node per block."""
        nv = self.num_vertices
        src, dst, eid = [], [], []
        for i, (a, b) in enumerate(self.edges):
            src += [a, b]
            dst += [b, a]
            eid += [i, i]
        for k, blk in enumerate(self.blocks):
            hub = nv + k
            for v in blk:
                src += [v, hub]
                dst += [hub, v]
                eid += [-1, -1]
        src = np.asarray(src, dtype=np.int64)
        order = np.argsort(src, kind="stable")
        ptr = np.zeros(self.num_nodes + 1, dtype=np.int64)
        np.add.at(ptr, src + 1, 1)
        return (np.cumsum(ptr), np.asarray(dst, dtype=np.int64)[order],
                np.asarray(eid, dtype=np.int64)[order])

    def kernel_args(self) -> tuple:
        ptr, nbr, eid = self.csr
        return ptr, nbr, eid, self.ea, self.eb

    def workspace(self) -> Workspace:
        return Workspace(self.num_nodes)

    def labels(self, bits: np.ndarray) -> np.ndarray:
        return union_find_labels(self.num_vertices, self.edges, bits, self.blocks)

    def component_count(self, bits: np.ndarray) -> int:
        lab = self.labels(bits)
        return int(np.count_nonzero(lab == np.arange(self.num_vertices)))

    def joined_avoiding(self, bits: np.ndarray, e: int, ws: Workspace | None = None) -> bool:
        """Are the endpoints of ``e`` joined without using ``e``?"""
        ws = ws or self.workspace()
        ptr, nbr, eid = self.csr
        return bool(K.connected_avoiding(ptr, nbr, eid, np.ascontiguousarray(bits, dtype=np.bool_),
                                         self.ea[e], self.eb[e], e, *ws.args()))

    def disjoint_copies(self, k: int) -> RcGraph:
        """``k`` disjoint copies; edge ``c * m + j`` is edge ``j`` of copy ``c``."""
        nv = self.num_vertices
        edges = np.concatenate([self.edges + c * nv for c in range(k)])
        blocks = tuple(tuple(v + c * nv for v in b) for c in range(k) for b in self.blocks)
        return RcGraph(nv * k, edges, blocks)

    @staticmethod
    def disjoint_union(graphs: list[RcGraph]) -> RcGraph:
        """Side-by-side union of graphs with identical edge counts."""
        offs = np.cumsum([0] + [g.num_vertices for g in graphs])
        edges = np.concatenate([g.edges + o for g, o in zip(graphs, offs)])
        blocks = tuple(tuple(v + o for v in b) for g, o in zip(graphs, offs) for b in g.blocks)
        return RcGraph(int(offs[-1]), edges, blocks)
