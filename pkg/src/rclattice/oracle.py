"""Exact computations by enumeration on tiny instances.

Ground truth for every statistical check.  Enumeration works on any
:class:`RcGraph`, so the dual graph and the wired dual box are first-class
inputs.  Clamped edges are folded in before enumeration: clamped-open edges
merge their endpoints, clamped-closed edges are dropped, and only the free
edges are enumerated.  Free-edge assignment ``mask`` sets free edge ``i`` open
iff bit ``i`` is set; free edges are taken in increasing edge-index order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve
from scipy.special import logsumexp

from . import _kernels as K
from .boundary import BoundaryCondition
from .config import RcConfig
from .errors import CapExceeded
from .graph import RcGraph
from .lattice import Lattice
from .params import RcParams, cut_open_prob

MEASURE_CAP = 24
MARGINAL_CAP = 30
TRANSITION_CAP = 14


_NO_TARGETS = np.empty(0, dtype=np.int64)


def as_graph(target, bc: BoundaryCondition | None = None) -> RcGraph:
    if isinstance(target, RcGraph):
        if bc is not None:
            raise ValueError("pass wiring inside the RcGraph, not as a boundary condition")
        return target
    if isinstance(target, Lattice):
        return target.graph(bc)
    raise TypeError(f"expected Lattice or RcGraph, got {type(target).__name__}")


def _split(m: int, condition: Mapping[int, int] | None):
    condition = dict(condition or {})
    for e, s in condition.items():
        if not 0 <= e < m:
            raise ValueError(f"clamped edge {e} out of range")
        if s not in (0, 1, True, False):
            raise ValueError(f"clamp state for edge {e} must be 0 or 1")
    free = np.array([e for e in range(m) if e not in condition], dtype=np.int64)
    fixed_open = np.array(sorted(e for e, s in condition.items() if s), dtype=np.int64)
    return free, fixed_open, condition


def _reduce(g: RcGraph, free: np.ndarray, fixed_open: np.ndarray, keep=()):
    """Contract clamped-open edges and wirings; keep only components touched by free edges.

    Returns (nv, ea, eb, offset) for a graph whose edge ``i`` is ``free[i]``; the
    component count of the full graph is the reduced count plus ``offset``.
    Vertices in ``keep`` are mapped through ``index`` as well.
    """
    bits = np.zeros(g.num_edges, dtype=bool)
    bits[fixed_open] = True
    lab = g.labels(bits)
    roots = np.unique(lab)
    touched = np.unique(np.concatenate([lab[g.ea[free]], lab[g.eb[free]],
                                        lab[np.asarray(keep, dtype=np.int64)]]))
    index = {int(r): i for i, r in enumerate(touched)}
    ea = np.array([index[int(lab[g.ea[e]])] for e in free], dtype=np.int64)
    eb = np.array([index[int(lab[g.eb[e]])] for e in free], dtype=np.int64)
    kept = np.array([index[int(lab[v])] for v in keep], dtype=np.int64)
    return len(touched), ea, eb, len(roots) - len(touched), kept


def _enum_args(g: RcGraph, free: np.ndarray, fixed_open: np.ndarray, keep=()):
    nv, ea, eb, offset, kept = _reduce(g, free, fixed_open, keep)
    k = len(free)
    return (nv, ea, eb, np.arange(nv, dtype=np.int64), np.empty(0, dtype=np.int64),
            np.arange(k, dtype=np.int64)), offset, kept


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    """The free edges of a clamped graph, on the contracted vertex set.

    Edge ``i`` of ``graph`` is edge ``free_edges[i]`` of the original; components
    of the original number ``graph``'s components plus ``offset``.
    """

    graph: RcGraph
    free_edges: np.ndarray
    offset: int
    num_open_fixed: int

    def key(self) -> tuple:
        return self.graph.num_vertices, self.graph.edges.tobytes()


def reduced_system(target, bc: BoundaryCondition | None,
                   condition: Mapping[int, int] | None) -> ReducedSystem:
    g = as_graph(target, bc)
    free, fixed_open, _ = _split(g.num_edges, condition)
    nv, ea, eb, offset, _ = _reduce(g, free, fixed_open)
    return ReducedSystem(RcGraph(nv, np.stack([ea, eb], axis=1)), free, offset, len(fixed_open))


def _log_weight(p: float, q: float, m: int, n_open: np.ndarray, comps: np.ndarray) -> np.ndarray:
    return n_open * np.log(p) + (m - n_open) * np.log1p(-p) + comps * np.log(q)


@dataclass(frozen=True, eq=False)
class ExactMeasure:
    graph: RcGraph
    params: RcParams
    free_edges: np.ndarray
    clamp: dict
    components: np.ndarray      # c(A) per free-edge mask
    weights: np.ndarray         # unnormalised, scaled by exp(-shift)
    log_partition: float
    probabilities: np.ndarray

    @property
    def partition_function(self) -> float:
        return float(np.exp(self.log_partition))

    @property
    def num_free(self) -> int:
        return len(self.free_edges)

    def mask_of(self, config) -> int:
        """Free-edge mask of a full configuration (which must respect the clamps)."""
        bits = np.asarray(getattr(config, "bits", config), dtype=bool)
        for e, s in self.clamp.items():
            if bool(bits[e]) != bool(s):
                raise ValueError(f"configuration violates clamp on edge {e}")
        return int(sum(1 << i for i, e in enumerate(self.free_edges) if bits[e]))

    def config_of(self, mask: int) -> RcConfig:
        bits = np.zeros(self.graph.num_edges, dtype=bool)
        for e, s in self.clamp.items():
            bits[e] = bool(s)
        for i, e in enumerate(self.free_edges):
            bits[e] = bool((mask >> i) & 1)
        return RcConfig(bits)

    def prob(self, config) -> float:
        return float(self.probabilities[self.mask_of(config)])

    def open_matrix(self) -> np.ndarray:
        """Boolean (2^k, k) table: free edge i open in mask."""
        masks = np.arange(1 << self.num_free, dtype=np.int64)[:, None]
        return ((masks >> np.arange(self.num_free)) & 1).astype(bool)


def exact_measure(target, bc: BoundaryCondition | None, params: RcParams,
                  condition: Mapping[int, int] | None = None, cap: int = MEASURE_CAP) -> ExactMeasure:
    """Random-cluster measure by full enumeration of the free edges."""
    g = as_graph(target, bc)
    free, fixed_open, clamp = _split(g.num_edges, condition)
    if len(free) > cap:
        raise CapExceeded(f"{len(free)} free edges exceed the enumeration cap {cap}")
    args, offset, _ = _enum_args(g, free, fixed_open)
    comps, _, _, _ = K.enumerate_free(*args, _NO_TARGETS, -1, -1, True)
    comps = comps + offset
    masks = np.arange(1 << len(free), dtype=np.uint64)
    n_open = np.bitwise_count(masks).astype(np.int64) + len(fixed_open)
    logw = _log_weight(params.p, params.q, g.num_edges, n_open, comps.astype(np.int64))
    shift = logw.max()
    w = np.exp(logw - shift)
    total = w.sum()
    return ExactMeasure(g, params, free, clamp, comps, w, float(shift + np.log(total)), w / total)


def edge_marginal(measure: ExactMeasure, e: int) -> float:
    if e in measure.clamp:
        return float(bool(measure.clamp[e]))
    i = int(np.searchsorted(measure.free_edges, e))
    masks = np.arange(len(measure.probabilities), dtype=np.int64)
    return float(measure.probabilities[((masks >> i) & 1).astype(bool)].sum())


def edge_marginals(measure: ExactMeasure) -> np.ndarray:
    return np.array([edge_marginal(measure, e) for e in range(measure.graph.num_edges)])


def connectivity_prob(measure: ExactMeasure, u: int, v: int) -> float:
    """Probability that ``u`` and ``v`` share a (wiring-merged) component."""
    if u == v:
        return 1.0
    g = measure.graph
    fixed_open = np.array(sorted(e for e, s in measure.clamp.items() if s), dtype=np.int64)
    args, _, (a, b) = _enum_args(g, measure.free_edges, fixed_open, keep=(u, v))
    _, ind, _, _ = K.enumerate_free(*args, _NO_TARGETS, a, b, True)
    return float(measure.probabilities[ind].sum())


@dataclass(frozen=True)
class ExactMarginals:
    marginals: np.ndarray
    log_partition: float
    free_edges: np.ndarray


def exact_marginals(target, bc: BoundaryCondition | None, params: RcParams,
                    condition: Mapping[int, int] | None = None,
                    cap: int = MARGINAL_CAP, edges=None) -> ExactMarginals:
    """Edge marginals and log Z without materialising the 2^k probability vector.

    Enumeration produces integer counts by (#open, #components); the weights are
    applied afterwards in log space.  ``edges`` limits which free edges get a
    marginal (the rest are NaN); by default all do.
    """
    g = as_graph(target, bc)
    free, fixed_open, clamp = _split(g.num_edges, condition)
    if len(free) > cap:
        raise CapExceeded(f"{len(free)} free edges exceed the marginal cap {cap}")
    args, offset, _ = _enum_args(g, free, fixed_open)
    wanted = free if edges is None else np.array([e for e in edges if e not in clamp], dtype=np.int64)
    targets = np.searchsorted(free, wanted).astype(np.int64)
    _, _, total, per_edge = K.enumerate_free(*args, targets, -1, -1, False)
    a = np.arange(total.shape[0])[:, None] + len(fixed_open)
    c = np.arange(total.shape[1])[None, :] + offset
    logw = _log_weight(params.p, params.q, g.num_edges, a, c)
    with np.errstate(divide="ignore"):
        log_z = logsumexp(logw + np.log(total))
        marg = np.full(g.num_edges, np.nan)
        for e, s in clamp.items():
            marg[e] = float(bool(s))
        for j, e in enumerate(wanted):
            marg[e] = np.exp(logsumexp(logw + np.log(per_edge[j])) - log_z)
    return ExactMarginals(marg, float(log_z), free)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    matrix: sp.csr_matrix
    measure: ExactMeasure
    cut: np.ndarray             # cut[A, i]: free edge i is a cut edge in A

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def transition_matrix(target, bc: BoundaryCondition | None, params: RcParams,
                      cap: int = TRANSITION_CAP) -> TransitionMatrix:
    """Heat-bath kernel on all 2^m configurations (sparse, <= m+1 entries per row)."""
    g = as_graph(target, bc)
    m = g.num_edges
    if m > cap:
        raise CapExceeded(f"{m} edges exceed the transition-matrix cap {cap}")
    mu = exact_measure(g, None, params)
    comps = mu.components
    states = np.arange(1 << m, dtype=np.int64)
    bit = 1 << np.arange(m, dtype=np.int64)
    flipped = states[:, None] ^ bit[None, :]
    cut = comps[states][:, None] != comps[flipped]
    p_open = np.where(cut, cut_open_prob(params), params.p)
    with_e = states[:, None] | bit[None, :]
    without_e = states[:, None] & ~bit[None, :]
    rows = np.concatenate([np.repeat(states, m), np.repeat(states, m)])
    cols = np.concatenate([with_e.ravel(), without_e.ravel()])
    vals = np.concatenate([(p_open / m).ravel(), ((1.0 - p_open) / m).ravel()])
    P = sp.csr_matrix((vals, (rows, cols)), shape=(1 << m, 1 << m))
    P.sum_duplicates()
    return TransitionMatrix(P, mu, cut)


def detailed_balance_error(tm: TransitionMatrix) -> float:
    """max |mu(A) P(A,B) - mu(B) P(B,A)| over all pairs."""
    mu = tm.measure.probabilities
    flow = sp.diags(mu) @ tm.matrix
    return float(abs(flow - flow.T).max())


def stationary_vector(tm: TransitionMatrix) -> np.ndarray:
    """Solve pi P = pi with sum(pi) = 1.

    One balance equation is redundant; it is replaced by pi[last] = 1, which keeps
    the system sparse, and the solution is normalised afterwards.
    """
    n = tm.dimension
    A = (tm.matrix.T - sp.identity(n, format="csr")).tocsr()
    A = sp.vstack([A[: n - 1], sp.csr_matrix(([1.0], ([0], [n - 1])), shape=(1, n))]).tocsc()
    b = np.zeros(n)
    b[n - 1] = 1.0
    pi = spsolve(A, b, permc_spec="MMD_AT_PLUS_A")
    return pi / pi.sum()


def power_stationary(tm: TransitionMatrix, iters: int = 20000, tol: float = 1e-14) -> np.ndarray:
    pi = np.full(tm.dimension, 1.0 / tm.dimension)
    PT = tm.matrix.T.tocsr()
    for _ in range(iters):
        nxt = PT @ pi
        if np.abs(nxt - pi).max() < tol:
            return nxt
        pi = nxt
    return pi


@dataclass(frozen=True)
class TvCurve:
    distances: np.ndarray
    tau: int | None             # first t with distance <= 1/4


def tv_curve(tm: TransitionMatrix, start, measure: ExactMeasure | None = None,
             t_max: int = 1000, eps: float = 0.25) -> TvCurve:
    measure = measure or tm.measure
    mu = measure.probabilities
    s = start if isinstance(start, (int, np.integer)) else measure.mask_of(start)
    row = np.zeros(tm.dimension)
    row[s] = 1.0
    PT = tm.matrix.T.tocsr()
    out = np.empty(t_max + 1)
    tau = None
    for t in range(t_max + 1):
        out[t] = 0.5 * np.abs(row - mu).sum()
        if tau is None and out[t] <= eps:
            tau = t
        row = PT @ row
    return TvCurve(out, tau)


def mixing_time(tm: TransitionMatrix, t_max: int = 5000, eps: float = 0.25) -> tuple[int, int]:
    """Exact worst-start mixing time; returns (tau_mix, worst start mask)."""
    mu = tm.measure.probabilities
    PT = tm.matrix.T.tocsr()
    cols = np.eye(tm.dimension)
    worst = 0
    for t in range(t_max + 1):
        tv = 0.5 * np.abs(cols - mu[:, None]).sum(axis=0)
        if tv.max() <= eps:
            return t, worst
        worst = int(np.argmax(tv))
        cols = PT @ cols
    raise CapExceeded(f"distance still above {eps} after {t_max} steps")
