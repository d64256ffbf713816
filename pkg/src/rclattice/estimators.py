"""Monte Carlo estimators: connectivity decay, spatial mixing, the sandwich, scaling fits.

Every estimate records its sample count, standard error and the backend that
produced it: ``oracle`` (exact enumeration), ``cftp`` (exact sampling) or
``dynamics`` (a long run with burn-in, errors from batch means).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels as K
from .boundary import BoundaryCondition
from .duality import critical_point
from .dynamics import CouplingResult, cftp_graph, grand_coupling, replica_keys, stream_key
from .errors import CapExceeded
from .graph import RcGraph
from .lattice import Lattice, box_region
from .oracle import (MARGINAL_CAP, MEASURE_CAP, connectivity_prob, exact_marginals,
                     exact_measure, reduced_system)
from .params import RcParams, cut_open_prob

log = logging.getLogger(__name__)

Z95 = 1.959963984540054


def agresti_coull(p_hat: float, n_eff: float, z: float = Z95) -> tuple[float, float]:
    """Agresti-Coull interval for a proportion observed over ``n_eff`` trials."""
    if n_eff <= 0:
        return 0.0, 1.0
    n_t = n_eff + z * z
    centre = (p_hat * n_eff + z * z / 2) / n_t
    half = z * math.sqrt(centre * (1 - centre) / n_t)
    return max(0.0, centre - half), min(1.0, centre + half)


# -- decay of connectivities ----------------------------------------------------------


def translated_pairs(lat: Lattice, d: int, margin: int = 0, stride: int = 1,
                     directions: str = "hv") -> list[tuple[int, int]]:
    """All pairs ``(x, y)``, ``(x + d, y)`` (and vertical ones) at least ``margin`` from the boundary."""
    n = lat.n
    lo, hi = margin, n - 1 - margin
    out = []
    for y in range(lo, hi + 1, stride):
        for x in range(lo, hi - d + 1, stride):
            if "h" in directions:
                out.append((lat.vid(x, y), lat.vid(x + d, y)))
            if "v" in directions:
                out.append((lat.vid(y, x), lat.vid(y, x + d)))
    return out


@dataclass
class DecayEstimate:
    distances: list[int]
    probabilities: np.ndarray
    stderr: np.ndarray
    intervals: list[tuple[float, float]]
    pairs: list[int]                # pairs per distance
    samples: int
    backend: str
    fitted_rate: float              # slope of log P against d; negative under decay
    rate_ci: tuple[float, float]
    excluded: list[int] = field(default_factory=list)   # distances with no successes

    def strictly_decreasing(self, z: float = Z95) -> bool:
        """Each step down in probability exceeds ``z`` combined standard errors."""
        p, s = self.probabilities, self.stderr
        return all(p[i] - p[i + 1] > z * math.hypot(s[i], s[i + 1]) for i in range(len(p) - 1))


def _distance(lat: Lattice, u: int, v: int) -> int:
    (xa, ya), (xb, yb) = lat.coord(u), lat.coord(v)
    return abs(xa - xb) + abs(ya - yb)


def _fit_log_linear(d: np.ndarray, p: np.ndarray, se: np.ndarray) -> tuple[float, tuple[float, float]]:
    """Weighted least squares of log p on d; weights from the delta method."""
    if len(d) < 2:
        return math.nan, (math.nan, math.nan)
    y = np.log(p)
    var = (se / p) ** 2
    if np.all(var == 0):
        var = np.ones_like(var)
        exact = True
    else:
        var = np.where(var > 0, var, var[var > 0].min())
        exact = False
    X = np.stack([np.ones_like(d, dtype=float), d.astype(float)], axis=1)
    W = np.diag(1.0 / var)
    cov = np.linalg.inv(X.T @ W @ X)
    beta = cov @ X.T @ W @ y
    if exact:
        return float(beta[1]), (float(beta[1]), float(beta[1]))
    half = Z95 * math.sqrt(cov[1, 1])
    return float(beta[1]), (float(beta[1] - half), float(beta[1] + half))


def _batch_se(frac: np.ndarray, batches: int) -> np.ndarray:
    """Standard error of the column means by non-overlapping batch means."""
    s = frac.shape[0]
    b = max(2, min(batches, s))
    size = s // b
    means = frac[: b * size].reshape(b, size, -1).mean(axis=1)
    return means.std(axis=0, ddof=1) / math.sqrt(b)


def estimate_decay(lat: Lattice, bc: BoundaryCondition, params: RcParams,
                   pairs: Sequence[tuple[int, int]], samples: int, seed: int,
                   backend: str = "auto", burn_in: int | None = None, thin: int | None = None,
                   batches: int = 50) -> DecayEstimate:
    """Estimate P(u <-> v) for each distance class of ``pairs``.

    Backends: ``oracle`` (exact; tiny boxes), ``cftp`` (independent exact samples),
    ``dynamics`` (one long heat-bath run: burn-in ``10 m ln m`` and one sample
    every ``m`` steps unless given).  The per-sample connected fraction of each
    class is the unit of averaging, since pairs in one sample are dependent.
    """
    if params.p >= critical_point(params.q):
        log.warning("p=%g is not below the critical point %g; decay is not expected",
                    params.p, critical_point(params.q))
    pairs = [(lat.vid(*u) if isinstance(u, tuple) else int(u),
              lat.vid(*v) if isinstance(v, tuple) else int(v)) for u, v in pairs]
    if not pairs:
        raise ValueError("no pairs given")
    dist = sorted({_distance(lat, u, v) for u, v in pairs})
    group = np.array([dist.index(_distance(lat, u, v)) for u, v in pairs], dtype=np.int64)
    per_group = np.bincount(group, minlength=len(dist))
    m = lat.num_edges
    g = lat.graph(bc)
    if backend == "auto":
        backend = "oracle" if m <= MEASURE_CAP else ("cftp" if m <= 2000 else "dynamics")

    if backend == "oracle":
        mu = exact_measure(lat, bc, params)
        probs = np.zeros(len(dist))
        for (u, v), k in zip(pairs, group):
            probs[k] += connectivity_prob(mu, u, v)
        probs /= per_group
        se = np.zeros(len(dist))
        samples_used = 0
    else:
        pu = np.array([u for u, _ in pairs], dtype=np.int64)
        pv = np.array([v for _, v in pairs], dtype=np.int64)
        if backend == "cftp":
            bits, _ = cftp_graph(g, params, replica_keys(seed, samples))
            lab = np.empty(g.num_vertices, dtype=np.int64)
            counts = np.zeros((samples, len(dist)), dtype=np.int64)
            for s in range(samples):
                K.labels(g.num_vertices, g.ea, g.eb, bits[s], g.wire_parent, lab)
                np.add.at(counts[s], group, lab[pu] == lab[pv])
        elif backend == "dynamics":
            burn_in = int(math.ceil(10 * m * math.log(m))) if burn_in is None else int(burn_in)
            thin = m if thin is None else int(thin)
            counts = np.zeros((samples, len(dist)), dtype=np.int64)
            ws = g.workspace()
            K.decay_sampler(*g.kernel_args(), g.num_vertices, np.zeros(m, dtype=np.bool_),
                            params.p, cut_open_prob(params), stream_key(seed), burn_in, thin,
                            samples, g.wire_parent, pu, pv, group, len(dist), counts, *ws.args())
        else:
            raise ValueError(f"unknown backend {backend!r}")
        frac = counts / per_group[None, :]
        probs = frac.mean(axis=0)
        if backend == "cftp":
            se = frac.std(axis=0, ddof=1) / math.sqrt(samples)
        else:
            se = _batch_se(frac, batches)
        samples_used = samples

    intervals = []
    for p_hat, s in zip(probs, se):
        n_eff = p_hat * (1 - p_hat) / s ** 2 if s > 0 else math.inf
        intervals.append((p_hat, p_hat) if math.isinf(n_eff) else agresti_coull(p_hat, n_eff))
    keep = probs > 0
    excluded = [d for d, k in zip(dist, keep) if not k]
    if excluded:
        log.warning("distances %s had no connected pairs and are left out of the fit", excluded)
    rate, ci = _fit_log_linear(np.array(dist)[keep], probs[keep], se[keep])
    return DecayEstimate(dist, probs, se, intervals, per_group.tolist(), samples_used, backend,
                         rate, ci, excluded)


# -- spatial mixing ---------------------------------------------------------------------


@dataclass
class SpatialMixingEstimate:
    edge: int
    radius: int
    discrepancy: float
    stderr: float
    marginals: tuple[float, float]
    clamps: tuple[str, str]
    bc: BoundaryCondition
    backend: str
    samples: int
    inner_edges: int


_spatial_cache: dict = {}


def _clamp_label(clamp: Mapping[int, int] | str) -> str:
    if isinstance(clamp, str):
        return clamp
    states = set(int(bool(s)) for s in clamp.values())
    return {frozenset({1}): "all-open", frozenset({0}): "all-closed"}.get(frozenset(states), "mixed")


def estimate_spatial_mixing(lat: Lattice, bc: BoundaryCondition, params: RcParams, e: int, r: int,
                            samples: int = 100_000, seed: int = 0,
                            clamps: tuple[Mapping[int, int], Mapping[int, int]] | None = None,
                            exact_cap: int = 27) -> SpatialMixingEstimate:
    """|mu(e=1 | clamp 1) - mu(e=1 | clamp 2)| for clamps on the edges outside B(e, r).

    Each clamped system is reduced to the free edges inside the box.  Up to
    ``exact_cap`` free edges the marginals are enumerated; beyond that the two
    reduced systems are sampled by CFTP with shared randomness, so the paired
    difference has small variance.  Results are memoised on the reduced systems.
    """
    box = box_region(lat, e, r)
    if clamps is None:
        clamps = ({o: 1 for o in box.outer_edges}, {o: 0 for o in box.outer_edges})
    systems = [reduced_system(lat, bc, c) for c in clamps]
    j = int(np.searchsorted(systems[0].free_edges, e))
    if not all(len(s.free_edges) == len(systems[0].free_edges) for s in systems) or \
            systems[0].free_edges[j] != e:
        raise ValueError("both clamps must leave the same free edges, including e")
    k = len(systems[0].free_edges)
    key = (systems[0].key(), systems[1].key(), j, params.p, params.q,
           None if k <= min(exact_cap, MARGINAL_CAP) else (samples, seed))
    if key not in _spatial_cache:
        if k <= min(exact_cap, MARGINAL_CAP):
            marg = tuple(float(exact_marginals(s.graph, None, params, edges=[j]).marginals[j])
                         for s in systems)
            _spatial_cache[key] = (marg, 0.0, "oracle", 0)
        else:
            union = RcGraph.disjoint_union([s.graph for s in systems])
            bits, _ = cftp_graph(union, params, replica_keys(seed, samples), stride=k, copies=2)
            a, b = bits[:, j].astype(float), bits[:, k + j].astype(float)
            diff = a - b
            _spatial_cache[key] = ((float(a.mean()), float(b.mean())),
                                   float(diff.std(ddof=1) / math.sqrt(samples)), "cftp", samples)
    marg, se, backend, used = _spatial_cache[key]
    return SpatialMixingEstimate(e, r, abs(marg[0] - marg[1]), se, marg,
                                 (_clamp_label(clamps[0]), _clamp_label(clamps[1])),
                                 bc, backend, used, k)


# -- the four-chain sandwich ------------------------------------------------------------


@dataclass
class SandwichResult:
    edge: int
    radius: int
    times: np.ndarray
    disagreement: np.ndarray        # fraction of replicas with Z+(e) != Z-(e)
    replicas: int
    steps: int
    violations: int


def sandwich_run(lat: Lattice, bc: BoundaryCondition, params: RcParams, e: int, r: int,
                 steps: int, seed: int, replicas: int = 1, record_every: int | None = None
                 ) -> SandwichResult:
    """Chains Z+ >= X >= Y >= Z- under one identity coupling.

    X and Z+ start all-open, Y and Z- all-closed; Z+ and Z- ignore updates of edges
    outside B(e, r).  Containment is checked at every step and a violation raises
    :class:`MonotonicityViolation`.
    """
    if params.q < 1:
        raise ValueError("the sandwich needs q >= 1")
    g = lat.graph(bc)
    m = g.num_edges
    box = box_region(lat, e, r)
    inside = np.zeros(m, dtype=bool)
    inside[list(box.inner_edges)] = True
    active = np.stack([inside, np.ones(m, bool), np.ones(m, bool), inside])
    every = record_every or max(1, steps // 200)
    acc = np.zeros(steps // every)
    for key in replica_keys(seed, replicas):
        starts = [np.ones(m, bool), np.ones(m, bool), np.zeros(m, bool), np.zeros(m, bool)]
        res = grand_coupling(g, params, starts, steps, key, active=active, watch=e,
                             record_every=every)
        acc += res.trace
    times = every * np.arange(1, len(acc) + 1)
    return SandwichResult(e, r, times, acc / replicas, replicas, steps, 0)


# -- mixing-time scaling ----------------------------------------------------------------


@dataclass
class ScalingRow:
    n: int
    m: int
    median: float
    quartiles: tuple[float, float]
    ratio: float                    # median / (m ln m)
    replicas: int
    capped: int


@dataclass
class ScalingReport:
    rows: list[ScalingRow]
    exponent: float                 # slope of log median against log n

    @property
    def ratio_spread(self) -> float:
        r = [row.ratio for row in self.rows]
        return max(r) / min(r)

    def table(self) -> str:
        lines = [f"{'n':>4} {'m':>6} {'median':>10} {'T/(m ln m)':>11} {'capped':>6}"]
        for row in self.rows:
            lines.append(f"{row.n:>4} {row.m:>6} {row.median:>10.0f} {row.ratio:>11.3f} "
                         f"{row.capped:>6}")
        lines.append(f"log-log exponent of T against n: {self.exponent:.3f}")
        return "\n".join(lines)


def fit_mixing_scaling(results: Mapping[int, CouplingResult] | Iterable[tuple[int, CouplingResult]]
                       ) -> ScalingReport:
    items = sorted(dict(results).items())
    if len(items) < 3:
        raise ValueError("a scaling fit needs at least three sizes")
    rows = []
    for n, res in items:
        capped = int(res.capped.sum())
        if capped:
            log.warning("n=%d: %d capped replicas left out of the median", n, capped)
        med = res.median
        rows.append(ScalingRow(n, res.m, med, res.quartiles, med / (res.m * math.log(res.m)),
                               len(res.steps), capped))
    ns = np.array([r.n for r in rows], dtype=float)
    meds = np.array([r.median for r in rows])
    ok = np.isfinite(meds)
    exponent = float(np.polyfit(np.log(ns[ok]), np.log(meds[ok]), 1)[0]) if ok.sum() >= 2 else math.nan
    return ScalingReport(rows, exponent)
