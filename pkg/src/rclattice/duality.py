"""Planar duality and the dual-box dynamics for the super-critical regime.

An open dual edge crosses a closed primal edge.  The dual of the free n-box is
realised as the wired (n+1)-box: its interior vertices are the bounded faces
and its contracted boundary is the outer face.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from math import sqrt

import numpy as np

from .boundary import wired
from .config import RcConfig
from ._kernels import draw
from .dynamics import ChainState, cftp_graph, replica_keys
from .lattice import DualGraph, Lattice, build_dual, build_lattice
from .params import RcParams, cut_open_prob


@dataclass(frozen=True)
class DualParams:
    p_star: float
    q: float

    def as_params(self) -> RcParams:
        return RcParams(self.p_star, self.q)


def dual_p(params: RcParams) -> float:
    p, q = params.p, params.q
    return q * (1.0 - p) / (p + q * (1.0 - p))


def dual_params(params: RcParams) -> DualParams:
    return DualParams(dual_p(params), params.q)


def critical_point(q: float) -> float:
    if q < 1:
        raise ValueError(f"critical point is defined here for q >= 1, got {q}")
    return sqrt(q) / (sqrt(q) + 1.0)


def dual_config(dual: DualGraph, config: RcConfig) -> RcConfig:
    """Dual edge open iff the primal edge it crosses is closed."""
    if config.num_edges != dual.num_edges:
        raise ValueError("configuration does not match the dual graph")
    return RcConfig(~config.bits[dual.primal_map])


@dataclass(frozen=True)
class DualBox:
    """Correspondence between the n-box and the wired (n+1)-box.

    ``primal_of[k]`` is the primal edge crossed by box edge ``k``, or -1 when both
    endpoints of ``k`` lie on the box boundary.
    """

    primal: Lattice
    box: Lattice
    primal_of: np.ndarray
    box_of: np.ndarray

    @property
    def boundary_edges(self) -> np.ndarray:
        return np.flatnonzero(self.primal_of < 0)

    @property
    def idle_fraction(self) -> float:
        return len(self.boundary_edges) / self.box.num_edges


@lru_cache(maxsize=None)
def dual_box(n: int) -> DualBox:
    primal = build_lattice(n)
    box = build_lattice(n + 1)
    on_bd = set(box.boundary)
    d = build_dual(primal)
    primal_of = np.full(box.num_edges, -1, dtype=np.int64)
    box_of = np.full(primal.num_edges, -1, dtype=np.int64)
    for k in range(primal.num_edges):
        (xa, ya), _ = primal.edge_coords(k)
        if ya == primal.edge_coords(k)[1][1]:
            # horizontal primal edge, crossed by a vertical box edge
            u, v = box.vid(xa + 1, ya), box.vid(xa + 1, ya + 1)
        else:
            u, v = box.vid(xa, ya + 1), box.vid(xa + 1, ya + 1)
        # Faces sit at box vertex (i+1, j+1); the outer face is the box boundary.
        faces = {int(f) for f in d.edges[k]}
        for w in (u, v):
            if w in on_bd:
                assert d.outer in faces
            else:
                x, y = box.coord(w)
                assert (y - 1) * (n - 1) + (x - 1) in faces
        be = box.edge_index(box.coord(u), box.coord(v))
        primal_of[be] = k
        box_of[k] = be
    for be, (a, b) in enumerate(box.edges):
        if primal_of[be] < 0:
            assert a in on_bd and b in on_bd
    return DualBox(primal, box, primal_of, box_of)


def _box_size(m_box: int) -> int:
    """n such that the (n+1)-box has ``m_box`` edges."""
    n = int(round((1 + sqrt(1 + 2 * m_box)) / 2)) - 1
    if 2 * (n + 1) * n != m_box:
        raise ValueError(f"{m_box} edges is not the size of a square box")
    return n


def _primal_size(m: int) -> int:
    n = int(round((1 + sqrt(1 + 2 * m)) / 2))
    if 2 * n * (n - 1) != m:
        raise ValueError(f"{m} edges is not the size of a square box")
    return n


def compatible_primal(dual_box_config: RcConfig, n: int | None = None) -> RcConfig:
    """The unique primal configuration whose dual is the contraction of ``dual_box_config``."""
    if n is None:
        n = _box_size(dual_box_config.num_edges)
    db = dual_box(n)
    if dual_box_config.num_edges != db.box.num_edges:
        raise ValueError("configuration is not on the (n+1)-box")
    return RcConfig(~dual_box_config.bits[db.box_of])


def lift_to_box(config: RcConfig, boundary_bits=None) -> RcConfig:
    """A compatible configuration on the (n+1)-box; boundary-cycle edges from ``boundary_bits``."""
    db = dual_box(_primal_size(config.num_edges))
    bits = np.zeros(db.box.num_edges, dtype=bool)
    bits[db.box_of] = ~config.bits
    if boundary_bits is not None:
        bits[db.boundary_edges] = np.asarray(boundary_bits, dtype=bool)
    return RcConfig(bits)


def induced_primal_step(x_prime_step: tuple[int, bool], state: ChainState) -> ChainState:
    """Move of the primal chain induced by one move of the wired dual-box chain.

    Boundary-cycle edges of the box leave the primal chain in place; otherwise the
    crossed primal edge takes the complementary state.
    """
    e_box, new_state = x_prime_step
    k = int(dual_box(_primal_size(state.config.num_edges)).primal_of[e_box])
    if k < 0:
        return replace(state, time=state.time + 1, cursor=state.cursor + 1)
    cfg = state.config.with_edge(k, not new_state)
    return replace(state, config=cfg, time=state.time + 1, cursor=state.cursor + 1)


def run_induced(n: int, params: RcParams, steps: int, key,
                start: RcConfig | None = None) -> tuple[RcConfig, int]:
    """Glauber dynamics on the wired (n+1)-box at p*, read through the duality map.

    Returns the induced primal configuration after ``steps`` box updates and the
    number of updates that hit a boundary-cycle edge, where the primal chain is
    held in place by construction.  The box chain starts from the
    configuration compatible with ``start`` whose boundary cycle is all closed.
    """
    db = dual_box(n)
    g = db.box.graph(wired(db.box))
    pd = dual_params(params).as_params()
    primal = start if start is not None else RcConfig.empty(db.primal.num_edges)
    box_bits = lift_to_box(primal).bits.copy()
    state = ChainState(g, primal)
    ws = g.workspace()
    idle = 0
    for t in range(steps):
        e, u = draw(np.uint64(key), t, g.num_edges)
        thr = pd.p if g.joined_avoiding(box_bits, int(e), ws) else cut_open_prob(pd)
        box_bits[e] = u < thr
        state = induced_primal_step((int(e), bool(box_bits[e])), state)
        idle += db.primal_of[e] < 0
    return state.config, idle


def dual_sample(n: int, params: RcParams, seed: int, count: int) -> np.ndarray:
    """Exact free-boundary samples at ``params`` via CFTP on the wired dual box at p*.

    Returns a (count, m) boolean array of primal configurations.
    """
    db = dual_box(n)
    g = db.box.graph(wired(db.box))
    box_bits, _ = cftp_graph(g, dual_params(params).as_params(), replica_keys(seed, count))
    return ~box_bits[:, db.box_of]
