"""Random-cluster configurations and connectivity queries under boundary wirings."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .boundary import BoundaryCondition
from .graph import union_find_labels
from .lattice import BoxRegion, Lattice


class RcConfig:
    """An edge subset, stored as a read-only boolean vector in edge-index order."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        arr = np.array(bits, dtype=bool).ravel()
        arr.setflags(write=False)
        self.bits = arr

    @classmethod
    def empty(cls, m: int) -> RcConfig:
        return cls(np.zeros(m, dtype=bool))

    @classmethod
    def full(cls, m: int) -> RcConfig:
        return cls(np.ones(m, dtype=bool))

    @classmethod
    def from_edges(cls, m: int, open_edges: Iterable[int]) -> RcConfig:
        bits = np.zeros(m, dtype=bool)
        idx = list(open_edges)
        if idx and (min(idx) < 0 or max(idx) >= m):
            raise ValueError("edge index out of range")
        bits[idx] = True
        return cls(bits)

    @classmethod
    def from_mask(cls, mask: int, m: int) -> RcConfig:
        return cls([(mask >> i) & 1 for i in range(m)])

    def to_mask(self) -> int:
        return sum(1 << i for i in np.flatnonzero(self.bits).tolist())

    @property
    def num_edges(self) -> int:
        return len(self.bits)

    @property
    def open_edges(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.bits).tolist())

    def __len__(self) -> int:
        return int(self.bits.sum())

    def __getitem__(self, e: int) -> bool:
        return bool(self.bits[e])

    def __eq__(self, other) -> bool:
        return isinstance(other, RcConfig) and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(np.packbits(self.bits).tobytes() + bytes([len(self.bits) % 256]))

    def __le__(self, other: RcConfig) -> bool:
        return bool(np.all(~self.bits | other.bits))

    def __repr__(self) -> str:
        return f"RcConfig(m={len(self.bits)}, open={len(self)})"

    def toggled(self, e: int) -> RcConfig:
        bits = self.bits.copy()
        bits[e] = ~bits[e]
        return RcConfig(bits)

    def with_edge(self, e: int, state: bool) -> RcConfig:
        bits = self.bits.copy()
        bits[e] = state
        return RcConfig(bits)

    def hamming(self, other: RcConfig) -> int:
        return int(np.count_nonzero(self.bits != other.bits))

    def to_hex(self, n: int) -> str:
        """``"<n>:<hex>"``; edge i is bit i of the hex integer."""
        if len(self.bits) != 2 * n * (n - 1):
            raise ValueError(f"configuration has {len(self.bits)} edges, not an {n}-box")
        width = (len(self.bits) + 3) // 4
        return f"{n}:{self.to_mask():0{width}x}"

    @classmethod
    def from_hex(cls, text: str) -> RcConfig:
        head, _, body = text.partition(":")
        n = int(head)
        m = 2 * n * (n - 1)
        mask = int(body, 16)
        if mask >> m:
            raise ValueError("hex payload has bits beyond the edge count")
        return cls.from_mask(mask, m)


def _bits(config) -> np.ndarray:
    return config.bits if isinstance(config, RcConfig) else np.asarray(config, dtype=bool)


@dataclass(frozen=True)
class ConnectivityView:
    config: RcConfig
    bc: BoundaryCondition
    component_count: int
    component_id: np.ndarray

    def same(self, u: int, v: int) -> bool:
        return bool(self.component_id[u] == self.component_id[v])


def components(lat: Lattice, config, bc: BoundaryCondition) -> ConnectivityView:
    if bc.n != lat.n:
        raise ValueError("boundary condition and lattice disagree on n")
    cfg = config if isinstance(config, RcConfig) else RcConfig(config)
    lab = union_find_labels(lat.num_vertices, lat.edges, cfg.bits, bc.wired_blocks)
    lab.setflags(write=False)
    count = int(np.count_nonzero(lab == np.arange(lat.num_vertices)))
    return ConnectivityView(cfg, bc, count, lab)


def is_cut_edge(lat: Lattice, config, bc: BoundaryCondition, e: int) -> bool:
    """Would flipping ``e`` change the wiring-merged component count?"""
    if not 0 <= e < lat.num_edges:
        raise ValueError(f"edge {e} out of range")
    return not lat.graph(bc).joined_avoiding(_bits(config), e)


def connected(lat: Lattice, config, bc: BoundaryCondition, u, v) -> bool:
    """Open-path connectivity, counting wired boundary vertices as joined."""
    u = lat.vid(*u) if isinstance(u, tuple) else int(u)
    v = lat.vid(*v) if isinstance(v, tuple) else int(v)
    return components(lat, config, bc).same(u, v)


def gamma_region(lat: Lattice, config, box: BoxRegion,
                 bc: BoundaryCondition | None = None) -> frozenset[int]:
    """Vertices of ``box`` not joined to its inner boundary.

    Clusters are taken in the plain open graph on the whole box; pass ``bc`` for
    the variant where boundary wirings also join clusters.
    """
    blocks = bc.wired_blocks if bc is not None else ()
    lab = union_find_labels(lat.num_vertices, lat.edges, _bits(config), blocks)
    touched = {int(lab[v]) for v in box.inner_boundary}
    return frozenset(v for v in box.vertices if int(lab[v]) not in touched)
