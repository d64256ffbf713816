"""Heat-bath Glauber dynamics, the identity coupling, coupling times and CFTP.

Every random choice comes from a counter-mode stream: the draw for step ``t``
is a pure function of ``(key, t)``, so any run can be replayed and CFTP never
stores its past.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernels as K
from .boundary import BoundaryCondition
from .config import ConnectivityView, RcConfig, components
from .errors import CapExceeded, MonotonicityViolation
from .graph import RcGraph
from .lattice import Lattice
from .params import RcParams, cut_open_prob

log = logging.getLogger(__name__)

CFTP_CAP = 2 ** 25

__all__ = [
    "RcParams", "UpdateDraw", "ChainState", "CouplingResult", "ContinuousSchedule",
    "cut_open_prob", "stream_key", "replica_keys", "draw_at", "draws", "new_chain",
    "step", "coupled_step", "run", "coupling_time", "cftp_sample", "cftp_samples",
    "cftp_graph", "continuous_schedule", "grand_coupling", "default_step_cap",
]


def stream_key(seed: int) -> np.uint64:
    return np.uint64(int(seed) % (1 << 64))


def replica_keys(seed: int, count: int) -> np.ndarray:
    out = np.empty(count, dtype=np.uint64)
    K.derive_keys(stream_key(seed), count, out)
    return out


@dataclass(frozen=True)
class UpdateDraw:
    edge: int
    u: float


def draw_at(key, t: int, m: int) -> UpdateDraw:
    e, u = K.draw(np.uint64(key), t, m)
    return UpdateDraw(int(e), float(u))


def draws(key, t0: int, count: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.empty(count, dtype=np.int64)
    us = np.empty(count, dtype=np.float64)
    K.draw_block(np.uint64(key), t0, count, m, edges, us)
    return edges, us


@dataclass(frozen=True, eq=False)
class ChainState:
    graph: RcGraph
    config: RcConfig
    time: float = 0.0
    cursor: int = 0
    lattice: Lattice | None = None
    bc: BoundaryCondition | None = None

    @property
    def view(self) -> ConnectivityView:
        if self.lattice is None or self.bc is None:
            raise ValueError("connectivity view needs the lattice and boundary condition")
        return components(self.lattice, self.config, self.bc)

    def is_cut(self, e: int) -> bool:
        return not self.graph.joined_avoiding(self.config.bits, e)


def new_chain(lat: Lattice, bc: BoundaryCondition, config: RcConfig | None = None) -> ChainState:
    g = lat.graph(bc)
    return ChainState(g, config if config is not None else RcConfig.empty(g.num_edges),
                      lattice=lat, bc=bc)


def step(chain: ChainState, params: RcParams, draw: UpdateDraw) -> ChainState:
    """One heat-bath update of ``draw.edge``; opens iff ``draw.u`` is below the threshold."""
    thr = cut_open_prob(params) if chain.is_cut(draw.edge) else params.p
    cfg = chain.config.with_edge(draw.edge, draw.u < thr)
    return replace(chain, config=cfg, time=chain.time + 1, cursor=chain.cursor + 1)


def coupled_step(x: ChainState, y: ChainState, params: RcParams,
                 draw: UpdateDraw) -> tuple[ChainState, ChainState]:
    if x.graph is not y.graph and (
        x.graph.num_vertices != y.graph.num_vertices
        or not np.array_equal(x.graph.edges, y.graph.edges)
        or x.graph.blocks != y.graph.blocks
    ):
        raise ValueError("coupled chains must share lattice and boundary condition")
    return step(x, params, draw), step(y, params, draw)


def run(chain: ChainState, params: RcParams, steps: int, key) -> ChainState:
    """Advance ``steps`` draws from the stream ``key``, starting at the chain's cursor."""
    g = chain.graph
    bits = chain.config.bits.copy()
    ws = g.workspace()
    K.run_chain(*g.kernel_args(), bits, params.p, cut_open_prob(params), np.uint64(key),
                chain.cursor, steps, np.ones(g.num_edges, dtype=np.bool_), *ws.args())
    return replace(chain, config=RcConfig(bits), time=chain.time + steps,
                   cursor=chain.cursor + steps)


def default_step_cap(m: int) -> int:
    return int(math.ceil(100 * m * math.log(max(m, 2))))


@dataclass
class CouplingResult:
    steps: np.ndarray           # per replica; -1 where the cap was hit
    capped: np.ndarray
    m: int
    cap: int
    threshold: float
    times: np.ndarray | None = None   # continuous-time coalescence times
    wall_time: list[float] = field(default_factory=list)

    @property
    def finished(self) -> np.ndarray:
        return self.steps[~self.capped]

    @property
    def median(self) -> float:
        return float(np.median(self.finished)) if self.finished.size else math.inf

    @property
    def quartiles(self) -> tuple[float, float]:
        if not self.finished.size:
            return math.inf, math.inf
        q1, q3 = np.quantile(self.finished, [0.25, 0.75])
        return float(q1), float(q3)

    @property
    def t_coup(self) -> float:
        """Smallest T with empirical P[not coalesced by T] <= threshold; capped runs count as infinite."""
        s = np.sort(np.where(self.capped, np.inf, self.steps.astype(float)))
        k = int(math.ceil((1.0 - self.threshold) * len(s))) - 1
        return float(s[max(k, 0)])


def _coalescence(g: RcGraph, params: RcParams, key, cap: int) -> int:
    x = np.ones(g.num_edges, dtype=np.bool_)
    y = np.zeros(g.num_edges, dtype=np.bool_)
    ws = g.workspace()
    return int(K.coalesce(*g.kernel_args(), x, y, params.p, cut_open_prob(params),
                          np.uint64(key), cap, *ws.args()))


def coupling_time(lat: Lattice, bc: BoundaryCondition, params: RcParams, seed: int,
                  threshold: float = 0.25, replicas: int = 21, cap: int | None = None,
                  mode: str = "discrete", workers: int = 1) -> CouplingResult:
    """Coalescence steps of identity-coupled chains from all-open and all-closed."""
    import time as _time

    g = lat.graph(bc)
    m = g.num_edges
    cap = default_step_cap(m) if cap is None else int(cap)
    keys = replica_keys(seed, replicas)
    walls: list[float] = []
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            steps = list(ex.map(_coalescence, [g] * replicas, [params] * replicas,
                                [int(k) for k in keys], [cap] * replicas))
        walls = [math.nan] * replicas
    else:
        steps = []
        for k in keys:
            t0 = _time.perf_counter()
            steps.append(_coalescence(g, params, k, cap))
            walls.append(_time.perf_counter() - t0)
    steps_arr = np.asarray(steps, dtype=np.int64)
    capped = steps_arr < 0
    if capped.any():
        log.warning("%d of %d replicas hit the step cap %d", capped.sum(), replicas, cap)
    times = None
    if mode == "continuous":
        # Event times of a rate-m Poisson process are independent of the marks,
        # so the k-th event time is Gamma(k, 1/m).
        rng = np.random.default_rng([int(seed) % (1 << 64), 0x7C0])
        times = np.array([rng.gamma(s, 1.0 / m) if s > 0 else (0.0 if s == 0 else math.inf)
                          for s in steps_arr])
    elif mode != "discrete":
        raise ValueError(f"mode must be 'discrete' or 'continuous', got {mode!r}")
    return CouplingResult(steps_arr, capped, m, cap, threshold, times, walls)


def cftp_graph(g: RcGraph, params: RcParams, keys: np.ndarray, stride: int | None = None,
               copies: int = 1, t_cap: int = CFTP_CAP, t_start: int | None = None
               ) -> tuple[np.ndarray, np.ndarray]:
    """Exact samples on ``g``, one per key.  Returns (bits[s, e], horizon[s]).

    With ``copies > 1`` the graph is treated as disjoint copies sharing every draw,
    which yields monotone-coupled exact samples of each copy.
    """
    m = g.num_edges
    stride = m // copies if stride is None else stride
    if stride * copies != m:
        raise ValueError("edge count must equal stride * copies")
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    out = np.zeros((len(keys), m), dtype=np.bool_)
    horizons = np.zeros(len(keys), dtype=np.int64)
    ws = g.workspace()
    K.cftp_many(*g.kernel_args(), stride, copies, params.p, cut_open_prob(params), keys,
                t_start or stride, t_cap, out, horizons, *ws.args())
    if (horizons < 0).any():
        raise CapExceeded(f"CFTP did not coalesce within {t_cap} steps "
                          f"for {(horizons < 0).sum()} of {len(keys)} samples")
    return out, horizons


def cftp_sample(lat: Lattice, bc: BoundaryCondition, params: RcParams, seed: int,
                t_cap: int = CFTP_CAP) -> RcConfig:
    bits, _ = cftp_graph(lat.graph(bc), params, np.array([stream_key(seed)]), t_cap=t_cap)
    return RcConfig(bits[0])


def cftp_samples(lat: Lattice, bc: BoundaryCondition, params: RcParams, seed: int,
                 count: int, t_cap: int = CFTP_CAP) -> np.ndarray:
    bits, _ = cftp_graph(lat.graph(bc), params, replica_keys(seed, count), t_cap=t_cap)
    return bits


@dataclass(frozen=True)
class ContinuousSchedule:
    times: np.ndarray
    edges: np.ndarray
    u: np.ndarray
    horizon: float
    rate: float

    def __len__(self) -> int:
        return len(self.times)

    def restricted(self, edge_set) -> ContinuousSchedule:
        """Thinning to ``edge_set``: each edge keeps its own rate-1 clock."""
        edge_set = np.unique(np.fromiter(edge_set, dtype=np.int64))
        keep = np.isin(self.edges, edge_set)
        return ContinuousSchedule(self.times[keep], self.edges[keep], self.u[keep],
                                  self.horizon, float(len(edge_set)))

    def draws(self):
        for t, e, u in zip(self.times, self.edges, self.u):
            yield float(t), UpdateDraw(int(e), float(u))


def continuous_schedule(lat: Lattice, horizon: float, seed: int) -> ContinuousSchedule:
    """Marked Poisson process of rate m on [0, horizon] with uniform edge marks."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    m = lat.num_edges
    rng = np.random.default_rng([int(seed) % (1 << 64), 0x7C0])
    count = int(rng.poisson(m * horizon))
    times = np.sort(rng.uniform(0.0, horizon, size=count))
    edges, us = draws(stream_key(seed), 0, count, m)
    return ContinuousSchedule(times, edges, us, float(horizon), float(m))


def run_continuous(chain: ChainState, params: RcParams, schedule: ContinuousSchedule) -> ChainState:
    for t, d in schedule.draws():
        chain = replace(step(chain, params, d), time=t)
    return chain


@dataclass
class GrandCouplingResult:
    chains: np.ndarray
    violations: int
    first_violation: int
    trace: np.ndarray


def grand_coupling(g: RcGraph, params: RcParams, starts: Sequence, steps: int, key,
                   active: np.ndarray | None = None, watch: int = 0, record_every: int = 0,
                   t0: int = 0, strict: bool = True) -> GrandCouplingResult:
    """Run chains ordered by containment (``starts[0]`` largest) with shared draws.

    ``active[i, e]`` False makes chain ``i`` ignore updates of edge ``e``.
    """
    chains = np.array([np.asarray(getattr(s, "bits", s), dtype=np.bool_) for s in starts])
    for i in range(len(chains) - 1):
        if np.any(chains[i + 1] & ~chains[i]):
            raise ValueError(f"start {i + 1} is not contained in start {i}")
    if active is None:
        active = np.ones_like(chains)
    n_rec = steps // record_every if record_every > 0 else 0
    trace = np.zeros(n_rec, dtype=np.bool_)
    ws = g.workspace()
    viol, first = K.multi_chain(*g.kernel_args(), chains, np.ascontiguousarray(active, dtype=np.bool_),
                                params.p, cut_open_prob(params), np.uint64(key), t0, steps,
                                watch, record_every, trace, *ws.args())
    if viol and strict:
        raise MonotonicityViolation(f"{viol} containment violations, first at step {first}")
    return GrandCouplingResult(chains, int(viol), int(first), trace)
