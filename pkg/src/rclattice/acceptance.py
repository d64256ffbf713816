"""Acceptance checks with pinned seeds, grouped into suites.

Each check returns a :class:`Check` carrying the measured values, so a report
shows what was measured alongside the verdict.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import chisquare

from .boundary import BoundaryCondition, all_side_homogeneous, free, side_homogeneous, wired
from .config import is_cut_edge
from .duality import compatible_primal, dual_box, dual_params, dual_sample
from .dynamics import cftp_graph, coupling_time, grand_coupling, replica_keys
from .errors import MonotonicityViolation
from .estimators import (estimate_decay, estimate_spatial_mixing, fit_mixing_scaling,
                         sandwich_run, translated_pairs)
from .graph import union_find_labels
from .lattice import build_lattice
from .oracle import (detailed_balance_error, edge_marginals, exact_measure, stationary_vector,
                     transition_matrix)
from .params import RcParams

PARAM_GRID = ((0.3, 1.5), (0.5, 2.0), (0.7, 3.0))


@dataclass
class Check:
    criterion: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        vals = ", ".join(f"{k}={_short(v)}" for k, v in self.measured.items())
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.criterion}. {self.name} ({self.seconds:.1f}s) {vals}"


def _short(v) -> str:
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


def timed(fn: Callable[[], Check]) -> Check:
    t0 = time.perf_counter()
    c = fn()
    c.seconds = time.perf_counter() - t0
    return c


# -- 1. exact stationarity --------------------------------------------------------------


def exact_stationarity() -> Check:
    t0 = time.perf_counter()
    worst_db = worst_st = 0.0
    cases = 0
    for n in (2, 3):
        lat = build_lattice(n)
        for _, bc in all_side_homogeneous(lat):
            for p, q in PARAM_GRID:
                tm = transition_matrix(lat, bc, RcParams(p, q))
                worst_db = max(worst_db, detailed_balance_error(tm))
                pi = stationary_vector(tm)
                worst_st = max(worst_st, float(np.abs(pi - tm.measure.probabilities).max()))
                cases += 1
    elapsed = time.perf_counter() - t0
    ok = worst_db <= 1e-12 and worst_st <= 1e-10 and elapsed < 60
    return Check(1, "exact stationarity", ok, {"cases": cases, "detailed_balance": worst_db,
                                              "stationary": worst_st, "runtime_s": elapsed})


# -- 2. CFTP exactness ------------------------------------------------------------------


def cftp_exactness(samples_small: int = 10 ** 6, samples_marg: int = 10 ** 5) -> Check:
    t0 = time.perf_counter()
    pr = RcParams(0.5, 2.0)
    lat2 = build_lattice(2)
    bits, _ = cftp_graph(lat2.graph(free(lat2)), pr, replica_keys(20240601, samples_small))
    mu2 = exact_measure(lat2, free(lat2), pr)
    idx = bits.astype(np.int64) @ (1 << np.arange(lat2.num_edges))
    observed = np.bincount(idx, minlength=16)
    p_value = float(chisquare(observed, mu2.probabilities * samples_small).pvalue)
    lat3 = build_lattice(3)
    bits3, _ = cftp_graph(lat3.graph(free(lat3)), pr, replica_keys(20240602, samples_marg))
    exact = edge_marginals(exact_measure(lat3, free(lat3), pr))
    z = np.abs(bits3.mean(axis=0) - exact) / np.sqrt(exact * (1 - exact) / samples_marg)
    elapsed = time.perf_counter() - t0
    ok = p_value > 1e-3 and z.max() < 4 and elapsed < 600
    return Check(2, "CFTP exactness", ok, {"chi2_p": p_value, "max_z": float(z.max()),
                                          "edges": len(z), "runtime_s": elapsed})


# -- 3. monotonicity --------------------------------------------------------------------


def monotonicity(steps: int = 10 ** 6) -> Check:
    lat = build_lattice(8)
    g = lat.graph(free(lat))
    m = lat.num_edges
    e = lat.edge_index((3, 3), (4, 3))
    violations = {}
    for p in (0.3, 0.7):
        pr = RcParams(p, 2.0)
        res = grand_coupling(g, pr, [np.ones(m, bool), np.zeros(m, bool)], steps, 77,
                             strict=False)
        violations[f"pair_p{p}"] = res.violations
        try:
            sandwich_run(lat, free(lat), pr, e, 2, steps, 78)
            violations[f"sandwich_p{p}"] = 0
        except MonotonicityViolation as exc:
            violations[f"sandwich_p{p}"] = str(exc)
    ok = all(v == 0 for v in violations.values())
    return Check(3, "monotone coupling and sandwich", ok, {"steps": steps, **violations})


# -- 4. cut-edge oracle equivalence -----------------------------------------------------


def _random_bc(lat, rng) -> BoundaryCondition:
    kind = rng.integers(4)
    if kind == 0:
        return free(lat)
    if kind == 1:
        kappa = [s + 1 for s in range(4) if rng.random() < 0.5]
        return side_homogeneous(lat, kappa)
    bd = np.array(lat.boundary)
    labels = rng.integers(0, max(1, len(bd) // 3), size=len(bd))
    blocks = [bd[labels == k].tolist() for k in np.unique(labels)]
    return BoundaryCondition.from_blocks(lat, blocks)


def cut_edge_equivalence(trials: int = 10 ** 4, seed: int = 4) -> Check:
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(trials):
        lat = build_lattice(int(rng.integers(2, 7)))
        bc = _random_bc(lat, rng)
        bits = rng.random(lat.num_edges) < rng.uniform(0.2, 0.8)
        e = int(rng.integers(lat.num_edges))
        with_e, without_e = bits.copy(), bits.copy()
        with_e[e], without_e[e] = True, False
        counts = []
        for b in (with_e, without_e):
            lab = union_find_labels(lat.num_vertices, lat.edges, b, bc.wired_blocks)
            counts.append(len(np.unique(lab)))
        if is_cut_edge(lat, bits, bc, e) != (counts[0] != counts[1]):
            mismatches += 1
    return Check(4, "cut-edge oracle equivalence", mismatches == 0,
                 {"trials": trials, "mismatches": mismatches})


# -- 5. duality -------------------------------------------------------------------------


def duality(samples: int = 10 ** 5) -> Check:
    pr = RcParams(0.3, 2.0)
    db = dual_box(2)
    mu = exact_measure(db.primal, free(db.primal), pr)
    dp = dual_params(pr).as_params()
    mud = exact_measure(db.box, wired(db.box), dp)
    worst = 0.0
    for mask in range(len(mud.probabilities)):
        cfg = mud.config_of(mask)
        bd = cfg.bits[db.boundary_edges]
        factor = float(np.prod(np.where(bd, dp.p, 1 - dp.p)))
        worst = max(worst, abs(mud.probabilities[mask] - mu.prob(compatible_primal(cfg)) * factor))
    pr_sup = RcParams(0.8, 2.0)
    lat3 = build_lattice(3)
    bits = dual_sample(3, pr_sup, 20240605, samples)
    exact = edge_marginals(exact_measure(lat3, free(lat3), pr_sup))
    z = np.abs(bits.mean(axis=0) - exact) / np.sqrt(exact * (1 - exact) / samples)
    ok = worst <= 1e-12 and z.max() < 4
    return Check(5, "duality", ok, {"eq7_max_error": worst, "dual_configs": len(mud.probabilities),
                                   "p_star": dp.p, "max_z": float(z.max())})


# -- 6. spatial mixing and the counterexample -------------------------------------------


def psi_instance():
    """n = 12, e on the bottom side, its endpoints wired to far vertices on the left and right."""
    lat = build_lattice(12)
    u, v = (5, 0), (6, 0)
    e = lat.edge_index(u, v)
    psi = BoundaryCondition.from_blocks(lat, [[lat.vid(*u), lat.vid(0, 5)],
                                              [lat.vid(*v), lat.vid(11, 5)]])
    return lat, e, psi


def spatial_mixing(samples: int = 20000, seed: int = 6) -> Check:
    lat, e, psi = psi_instance()
    pr = RcParams(0.5, 3.0)
    small = estimate_spatial_mixing(lat, psi, pr, e, 1)
    open_m, closed_m = small.marginals
    psi_d = [estimate_spatial_mixing(lat, psi, pr, e, r, samples, seed) for r in (1, 2, 3)]
    psi_ok = (abs(open_m - 0.5) <= 1e-12 and closed_m <= 0.4
              and all(d.discrepancy - 3 * d.stderr >= 0.1 for d in psi_d))
    trend_ok = True
    curves = {}
    for kappa, bc in all_side_homogeneous(lat):
        ds = [estimate_spatial_mixing(lat, bc, pr, e, r, samples, seed) for r in (1, 2, 3)]
        curves[kappa] = [d.discrepancy for d in ds]
        for a, b in zip(ds, ds[1:]):
            noise = 3 * math.hypot(a.stderr, b.stderr)
            if a.discrepancy > noise:
                trend_ok &= a.discrepancy - b.discrepancy > noise
            else:
                trend_ok &= b.discrepancy <= a.discrepancy + noise
    distinct = sorted({tuple(round(x, 6) for x in c) for c in curves.values()})
    return Check(6, "spatial mixing vs the psi wiring", psi_ok and trend_ok, {
        "psi_open": open_m, "psi_closed": closed_m,
        "psi_discrepancy_r123": [d.discrepancy for d in psi_d],
        "side_homogeneous_curves": [list(c) for c in distinct],
    })


# -- 7. scaling -------------------------------------------------------------------------


def mixing_scaling(replicas: int = 21, seed: int = 7) -> Check:
    t0 = time.perf_counter()
    sizes = (8, 16, 32)
    res2 = {n: coupling_time(build_lattice(n), free(build_lattice(n)), RcParams(0.4, 2.0),
                             seed, replicas=replicas) for n in sizes}
    rep = fit_mixing_scaling(res2)
    res1 = {n: coupling_time(build_lattice(n), free(build_lattice(n)), RcParams(0.4, 1.0),
                             seed + 1, replicas=replicas) for n in sizes}
    base = fit_mixing_scaling(res1)
    base_ratios = [r.ratio for r in base.rows]
    elapsed = time.perf_counter() - t0
    ok = rep.ratio_spread <= 3 and all(0.5 <= r <= 2 for r in base_ratios) and elapsed < 1800
    return Check(7, "mixing-time scaling", ok, {
        "ratios_q2": [r.ratio for r in rep.rows], "spread": rep.ratio_spread,
        "exponent": rep.exponent, "ratios_q1": base_ratios, "runtime_s": elapsed,
    })


# -- 8. decay ---------------------------------------------------------------------------


def connectivity_decay(samples: int = 20000, seed: int = 8) -> Check:
    lat = build_lattice(64)
    pairs = [pp for d in (4, 8, 16) for pp in translated_pairs(lat, d, margin=8, stride=2)]
    est = estimate_decay(lat, free(lat), RcParams(0.42, 2.0), pairs, samples, seed,
                         backend="dynamics")
    ok = (est.samples >= 2 * 10 ** 4 and est.strictly_decreasing()
          and est.rate_ci[1] < 0 and not est.excluded)
    return Check(8, "decay of connectivities", ok, {
        "P": [float(x) for x in est.probabilities], "stderr": [float(x) for x in est.stderr],
        "slope": est.fitted_rate, "slope_ci": list(est.rate_ci), "samples": est.samples,
    })


SUITES: dict[str, list[Callable[[], Check]]] = {
    "exact": [exact_stationarity, cut_edge_equivalence],
    "coupling": [cftp_exactness, monotonicity],
    "duality": [duality],
    "spatial": [spatial_mixing],
    "scaling": [mixing_scaling],
    "decay": [connectivity_decay],
}


def run_suite(name: str, echo: Callable[[str], None] | None = None) -> list[Check]:
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    out = []
    for s in names:
        for fn in SUITES[s]:
            c = timed(fn)
            if echo:
                echo(c.line())
            out.append(c)
    return out
