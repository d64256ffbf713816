import math

import numpy as np
import pytest

from rclattice.boundary import free, side_homogeneous, wired
from rclattice.dynamics import coupling_time
from rclattice.estimators import (
    agresti_coull,
    estimate_decay,
    estimate_spatial_mixing,
    fit_mixing_scaling,
    sandwich_run,
    translated_pairs,
)
from rclattice.lattice import box_region, build_lattice
from rclattice.oracle import connectivity_prob, edge_marginal, exact_measure
from rclattice.params import RcParams


def test_agresti_coull_values():
    lo, hi = agresti_coull(0.5, 100)
    assert lo == pytest.approx(0.40383, abs=1e-4) and hi == pytest.approx(0.59617, abs=1e-4)
    lo, hi = agresti_coull(0.0, 50)
    assert lo == 0.0 and 0 < hi < 0.1
    assert agresti_coull(0.3, 0) == (0.0, 1.0)


def test_translated_pairs():
    lat = build_lattice(6)
    pairs = translated_pairs(lat, 2)
    assert len(pairs) == 2 * 6 * 4
    for u, v in pairs:
        (x0, y0), (x1, y1) = lat.coord(u), lat.coord(v)
        assert abs(x0 - x1) + abs(y0 - y1) == 2
    inner = translated_pairs(lat, 1, margin=1, directions="h")
    assert len(inner) == 4 * 3
    assert all(u not in lat.boundary and v not in lat.boundary for u, v in inner)


def test_decay_oracle_backend():
    lat = build_lattice(3)
    params = RcParams(0.4, 2.0)
    pairs = [(0, 1), (0, 2), (3, 5)]
    est = estimate_decay(lat, free(lat), params, pairs, samples=0, seed=0, backend="oracle")
    mu = exact_measure(lat, free(lat), params)
    assert est.distances == [1, 2]
    assert est.probabilities[0] == pytest.approx(connectivity_prob(mu, 0, 1), abs=1e-12)
    want = (connectivity_prob(mu, 0, 2) + connectivity_prob(mu, 3, 5)) / 2
    assert est.probabilities[1] == pytest.approx(want, abs=1e-12)
    assert est.pairs == [1, 2]


@pytest.mark.parametrize("backend", ["cftp", "dynamics"])
def test_decay_q1_matches_oracle(backend):
    lat = build_lattice(3)
    params = RcParams(0.35, 1.0)
    pairs = [(4, 5)]
    est = estimate_decay(lat, free(lat), params, pairs, samples=20000, seed=3, backend=backend)
    exact = connectivity_prob(exact_measure(lat, free(lat), params), 4, 5)
    assert est.backend == backend
    assert abs(est.probabilities[0] - exact) < 3 * est.stderr[0]
    lo, hi = est.intervals[0]
    assert lo < est.probabilities[0] < hi


def test_decay_wired_boundary_pairs():
    lat = build_lattice(8)
    pairs = [(lat.vid(0, 0), lat.vid(d, 0)) for d in (1, 3, 7)]
    est = estimate_decay(lat, wired(lat), RcParams(0.3, 2.0), pairs, samples=50, seed=1, backend="cftp")
    assert np.all(est.probabilities == 1.0)


def test_decay_excludes_empty_distances():
    lat = build_lattice(12)
    pairs = translated_pairs(lat, 1) + translated_pairs(lat, 2) + [(lat.vid(0, 5), lat.vid(10, 5))]
    est = estimate_decay(lat, free(lat), RcParams(0.2, 1.0), pairs, samples=200, seed=2, backend="cftp")
    assert est.distances == [1, 2, 10] and est.excluded == [10]
    assert est.fitted_rate < 0


def test_decay_rejects_unknown_backend():
    lat = build_lattice(3)
    with pytest.raises(ValueError):
        estimate_decay(lat, free(lat), RcParams(0.3, 2.0), [(0, 1)], 10, 0, backend="magic")
    with pytest.raises(ValueError):
        estimate_decay(lat, free(lat), RcParams(0.3, 2.0), [], 10, 0)


def test_decay_rate_sign():
    lat = build_lattice(16)
    pairs = [p for d in (1, 2, 3, 4) for p in translated_pairs(lat, d, margin=4, stride=2)]
    est = estimate_decay(lat, free(lat), RcParams(0.4, 2.0), pairs, samples=400, seed=5)
    assert est.rate_ci[1] < 0
    assert est.strictly_decreasing()


def test_spatial_oracle_equals_direct_conditioning():
    lat = build_lattice(5)
    bc = side_homogeneous(lat, (1, 3))
    params = RcParams(0.5, 3.0)
    e = lat.edge_index((2, 2), (3, 2))
    box = box_region(lat, e, 1)
    est = estimate_spatial_mixing(lat, bc, params, e, 1)
    a = edge_marginal(exact_measure(lat, bc, params, {o: 1 for o in box.outer_edges}), e)
    b = edge_marginal(exact_measure(lat, bc, params, {o: 0 for o in box.outer_edges}), e)
    assert est.backend == "oracle"
    assert est.marginals[0] == pytest.approx(a, abs=1e-12)
    assert est.marginals[1] == pytest.approx(b, abs=1e-12)
    assert est.discrepancy == pytest.approx(abs(a - b), abs=1e-12)
    assert est.clamps == ("all-open", "all-closed")


def test_spatial_q1_zero():
    lat = build_lattice(6)
    e = lat.edge_index((2, 3), (3, 3))
    for r in (1, 2, 3):
        est = estimate_spatial_mixing(lat, wired(lat), RcParams(0.4, 1.0), e, r, samples=2000, seed=r)
        # with shared draws the two clamped copies of e agree sample by sample
        assert est.discrepancy == pytest.approx(0.0, abs=1e-12)


def test_spatial_cftp_backend_agrees_with_oracle():
    lat = build_lattice(5)
    bc = wired(lat)
    params = RcParams(0.5, 2.0)
    e = lat.edge_index((2, 2), (2, 3))
    exact = estimate_spatial_mixing(lat, bc, params, e, 1)
    mc = estimate_spatial_mixing(lat, bc, params, e, 1, samples=20000, seed=4, exact_cap=0)
    assert mc.backend == "cftp" and mc.samples == 20000
    # the clamped-open chain dominates the clamped-closed one in the coupling
    assert mc.marginals[0] >= mc.marginals[1]
    assert abs(mc.discrepancy - exact.discrepancy) < 4 * mc.stderr + 1e-9


def test_spatial_rejects_mismatched_clamps():
    lat = build_lattice(4)
    e = lat.edge_index((1, 1), (2, 1))
    box = box_region(lat, e, 1)
    c1 = {o: 1 for o in box.outer_edges}
    c2 = dict(c1)
    c2[e] = 0
    with pytest.raises(ValueError):
        estimate_spatial_mixing(lat, free(lat), RcParams(0.5, 2.0), e, 1, clamps=(c1, c2))


def test_sandwich_containment_and_trend():
    lat = build_lattice(8)
    e = lat.edge_index((3, 3), (4, 3))
    res = sandwich_run(lat, free(lat), RcParams(0.45, 2.0), e, 2, steps=20000, seed=1,
                       replicas=40, record_every=20)
    assert res.violations == 0
    assert len(res.times) == 1000 and res.disagreement[0] > 0.5
    assert res.disagreement[-10:].mean() < res.disagreement[:5].mean()


def test_sandwich_collapses_at_q1():
    lat = build_lattice(6)
    e = lat.edge_index((2, 2), (3, 2))
    inner = len(box_region(lat, e, 1).inner_edges)
    res = sandwich_run(lat, free(lat), RcParams(0.5, 1.0), e, 1, steps=4000, seed=2,
                       replicas=20, record_every=100)
    # by 4000 steps every inner edge has been drawn with overwhelming probability
    assert res.disagreement[-1] == 0.0
    assert inner < 20


def test_fit_mixing_scaling():
    params = RcParams(0.3, 1.0)
    results = {n: coupling_time(build_lattice(n), free(build_lattice(n)), params, seed=n, replicas=21)
               for n in (4, 8, 16)}
    report = fit_mixing_scaling(results)
    assert [r.n for r in report.rows] == [4, 8, 16]
    assert 2.0 < report.exponent < 2.8
    assert report.ratio_spread < 2.0
    assert "exponent" in report.table()
    with pytest.raises(ValueError):
        fit_mixing_scaling({4: results[4], 8: results[8]})
