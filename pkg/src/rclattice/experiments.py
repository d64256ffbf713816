"""Declarative experiments: a validated spec in, a content-addressed run directory out.

A run directory holds ``results.csv`` (one row per estimate), ``summary.json``
and, for sampling kinds, ``samples.txt`` with one hex configuration per line.
Those files depend only on the spec.  Wall-clock times go to ``timing.csv`` so
that the others stay byte-identical between runs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
import time
from pathlib import Path
from typing import Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .boundary import BoundaryCondition, parse_bc
from .config import RcConfig
from .duality import critical_point, dual_p, dual_sample
from .dynamics import cftp_samples, coupling_time, new_chain, replica_keys
from .dynamics import run as run_chain
from .estimators import (estimate_decay, estimate_spatial_mixing, fit_mixing_scaling,
                         sandwich_run, translated_pairs)
from .lattice import Lattice, build_lattice
from .oracle import (TRANSITION_CAP, connectivity_prob, edge_marginals, exact_measure,
                     transition_matrix, tv_curve)
from .params import RcParams

COLUMNS = ("experiment", "n", "p", "q", "bc", "r_or_d", "estimate", "stderr", "samples",
           "backend", "seed")

Kind = Literal["sample", "cftp", "couple", "oracle", "decay", "spatial", "scaling", "sandwich",
               "dual-sample"]
Vertex = tuple[int, int]


class ExperimentSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Kind
    seed: int = Field(ge=0, lt=2 ** 64)
    n: Optional[int] = Field(default=None, ge=2)
    p: float = Field(gt=0.0, lt=1.0)
    q: float = Field(ge=1.0)
    bc: Union[Literal["free", "wired"], dict[str, Any]] = "free"
    replicas: int = Field(default=21, ge=1)
    samples: int = Field(default=1000, ge=1)
    steps: Optional[int] = Field(default=None, ge=1)
    cap: Optional[int] = Field(default=None, ge=1)
    threshold: float = Field(default=0.25, gt=0.0, lt=1.0)
    mode: Literal["discrete", "continuous"] = "discrete"
    edge: Optional[tuple[Vertex, Vertex]] = None
    radii: Optional[list[int]] = None
    pairs: Optional[list[tuple[Vertex, Vertex]]] = None
    distances: Optional[list[int]] = None
    margin: int = Field(default=0, ge=0)
    sizes: Optional[list[int]] = None
    backend: Literal["auto", "oracle", "cftp", "dynamics"] = "auto"
    via_dual: bool = False

    @field_validator("radii", "distances", "sizes")
    @classmethod
    def _positive(cls, v):
        if v is not None and (not v or min(v) < 1):
            raise ValueError("must be a non-empty list of positive integers")
        return v

    @model_validator(mode="after")
    def _needs(self):
        need = {
            "sample": ["n"], "cftp": ["n"], "couple": ["n"], "oracle": ["n"],
            "decay": ["n"], "spatial": ["n", "edge", "radii"], "scaling": ["sizes"],
            "sandwich": ["n", "edge", "radii"], "dual-sample": ["n"],
        }[self.kind]
        missing = [f for f in need if getattr(self, f) is None]
        if missing:
            raise ValueError(f"kind {self.kind!r} requires {', '.join(missing)}")
        if self.kind == "decay" and self.pairs is None and self.distances is None:
            raise ValueError("kind 'decay' requires pairs or distances")
        if self.kind == "scaling" and len(self.sizes) < 3:
            raise ValueError("kind 'scaling' requires at least three sizes")
        return self

    @property
    def params(self) -> RcParams:
        return RcParams(self.p, self.q)

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


def _bc_label(spec: ExperimentSpec) -> str:
    return spec.bc if isinstance(spec.bc, str) else json.dumps(spec.bc, sort_keys=True,
                                                               separators=(",", ":"))


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return "inf" if math.isinf(x) else ("nan" if math.isnan(x) else repr(float(x)))
    return str(x)


class _Result:
    def __init__(self, spec: ExperimentSpec, workers: int = 1):
        self.spec = spec
        self.workers = workers
        self.rows: list[dict] = []
        self.summary: dict[str, Any] = {"kind": spec.kind, "spec": spec.model_dump(mode="json")}
        self.samples: list[str] | None = None
        self.timing: list[tuple[str, float]] = []

    def row(self, r_or_d, estimate, stderr, samples, backend, n=None, experiment=None):
        s = self.spec
        self.rows.append({
            "experiment": experiment or s.kind, "n": s.n if n is None else n, "p": s.p, "q": s.q,
            "bc": _bc_label(s), "r_or_d": r_or_d, "estimate": estimate, "stderr": stderr,
            "samples": samples, "backend": backend, "seed": s.seed,
        })

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in COLUMNS])
        return buf.getvalue()


def _edge_id(lat: Lattice, edge) -> int:
    (a, b) = edge
    return lat.edge_index(tuple(a), tuple(b))


def _marginal_rows(res: _Result, bits: np.ndarray, backend: str) -> None:
    s = len(bits)
    mean = bits.mean(axis=0)
    se = np.sqrt(mean * (1 - mean) / s) if s > 1 else np.zeros_like(mean)
    for e, (m_e, se_e) in enumerate(zip(mean, se)):
        res.row(e, float(m_e), float(se_e), s, backend)
    res.samples = [RcConfig(b).to_hex(res.spec.n) for b in bits]
    res.summary["edge_density"] = float(mean.mean())


def _sample(spec: ExperimentSpec, lat: Lattice, bc: BoundaryCondition, res: _Result) -> None:
    pr = spec.params
    if spec.via_dual or spec.kind == "dual-sample":
        if bc.wired_blocks:
            raise ValueError("sampling through the dual is implemented for the free boundary")
        if pr.p <= critical_point(pr.q):
            raise ValueError(f"p={pr.p} is not above the critical point {critical_point(pr.q):.6f}; "
                             "sample the primal directly")
        bits = dual_sample(spec.n, pr, spec.seed, spec.samples)
        res.summary["dual_p"] = dual_p(pr)
        _marginal_rows(res, bits, "cftp-dual")
    elif spec.kind == "cftp":
        _marginal_rows(res, cftp_samples(lat, bc, pr, spec.seed, spec.samples), "cftp")
    else:
        steps = spec.steps or int(math.ceil(10 * lat.num_edges * math.log(lat.num_edges)))
        out = []
        for k in replica_keys(spec.seed, spec.samples):
            out.append(run_chain(new_chain(lat, bc), pr, steps, k).config.bits)
        res.summary["steps"] = steps
        _marginal_rows(res, np.array(out), "dynamics")


def _couple(spec, lat, bc, res):
    r = coupling_time(lat, bc, spec.params, spec.seed, threshold=spec.threshold,
                      replicas=spec.replicas, cap=spec.cap, mode=spec.mode, workers=res.workers)
    for i, st in enumerate(r.steps):
        est = float(r.times[i]) if r.times is not None else int(st)
        res.row(i, est if st >= 0 else math.inf, 0.0, 1, spec.mode)
        res.timing.append((f"replica{i}", r.wall_time[i]))
    q1, q3 = r.quartiles
    res.summary.update(m=r.m, cap=r.cap, median=r.median, quartiles=[q1, q3], t_coup=r.t_coup,
                       capped=int(r.capped.sum()), ratio=r.median / (r.m * math.log(r.m)))


def _oracle(spec, lat, bc, res):
    mu = exact_measure(lat, bc, spec.params)
    marg = edge_marginals(mu)
    for e, v in enumerate(marg):
        res.row(e, float(v), 0.0, 0, "oracle")
    res.summary.update(partition_function=mu.partition_function, log_partition=mu.log_partition,
                       marginals=[float(v) for v in marg])
    if spec.pairs:
        res.summary["connectivity"] = [
            {"u": list(u), "v": list(v), "prob": connectivity_prob(mu, lat.vid(*u), lat.vid(*v))}
            for u, v in spec.pairs]
    if lat.num_edges <= TRANSITION_CAP:
        tm = transition_matrix(lat, bc, spec.params)
        starts = range(tm.dimension) if tm.dimension <= 256 else (0, tm.dimension - 1)
        res.summary["tau_mix_by_start"] = {
            RcConfig.from_mask(s, lat.num_edges).to_hex(lat.n): tv_curve(tm, s, t_max=10 ** 4).tau
            for s in starts}


def _decay(spec, lat, bc, res):
    if spec.pairs is not None:
        pairs = [(lat.vid(*u), lat.vid(*v)) for u, v in spec.pairs]
    else:
        pairs = [pp for d in spec.distances for pp in translated_pairs(lat, d, spec.margin)]
    est = estimate_decay(lat, bc, spec.params, pairs, spec.samples, spec.seed, spec.backend,
                         burn_in=spec.steps)
    for d, pr, se in zip(est.distances, est.probabilities, est.stderr):
        res.row(d, float(pr), float(se), est.samples, est.backend)
    res.summary.update(fitted_rate=est.fitted_rate, rate_ci=list(est.rate_ci),
                       excluded=est.excluded, strictly_decreasing=est.strictly_decreasing(),
                       pairs_per_distance=est.pairs)


def _spatial(spec, lat, bc, res):
    e = _edge_id(lat, spec.edge)
    out = []
    for r in spec.radii:
        est = estimate_spatial_mixing(lat, bc, spec.params, e, r, spec.samples, spec.seed)
        res.row(r, est.discrepancy, est.stderr, est.samples, est.backend)
        out.append({"r": r, "marginals": list(est.marginals), "discrepancy": est.discrepancy})
    res.summary.update(edge=e, radii=out)


def _sandwich(spec, lat, bc, res):
    e = _edge_id(lat, spec.edge)
    steps = spec.steps or 10 ** 5
    for r in spec.radii:
        s = sandwich_run(lat, bc, spec.params, e, r, steps, spec.seed, replicas=spec.replicas)
        se = np.sqrt(s.disagreement * (1 - s.disagreement) / s.replicas)
        for t, d, v in zip(s.times, s.disagreement, se):
            res.row(int(t), float(d), float(v), s.replicas, "dynamics",
                    experiment=f"sandwich-r{r}")
    res.summary.update(edge=e, steps=steps, violations=0)


def _scaling(spec, lat, bc, res):
    results = {}
    for n in spec.sizes:
        lat_n = build_lattice(n)
        t0 = time.perf_counter()
        results[n] = coupling_time(lat_n, parse_bc(lat_n, spec.bc), spec.params, spec.seed,
                                   threshold=spec.threshold, replicas=spec.replicas, cap=spec.cap,
                                   workers=res.workers)
        res.timing.append((f"n{n}", time.perf_counter() - t0))
    rep = fit_mixing_scaling(results)
    for row in rep.rows:
        res.row(row.n, row.ratio, 0.0, row.replicas, "dynamics", n=row.n)
    res.summary.update(exponent=rep.exponent, ratio_spread=rep.ratio_spread,
                       rows=[{"n": r.n, "m": r.m, "median": r.median, "ratio": r.ratio,
                              "capped": r.capped} for r in rep.rows])


_HANDLERS = {
    "sample": _sample, "cftp": _sample, "dual-sample": _sample, "couple": _couple,
    "oracle": _oracle, "decay": _decay, "spatial": _spatial, "sandwich": _sandwich,
    "scaling": _scaling,
}


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return None if math.isnan(x) else ("inf" if math.isinf(x) else x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def execute(spec: ExperimentSpec, workers: int = 1) -> _Result:
    res = _Result(spec, workers)
    lat = build_lattice(spec.n) if spec.n is not None else None
    bc = parse_bc(lat, spec.bc) if lat is not None else None
    t0 = time.perf_counter()
    _HANDLERS[spec.kind](spec, lat, bc, res)
    res.timing.append(("total", time.perf_counter() - t0))
    return res


def run(spec: ExperimentSpec, out: str | os.PathLike, workers: int = 1) -> Path:
    """Run ``spec`` and write its outputs under ``out/<kind>-<spec digest>/``.

    ``workers`` only changes how replicas are scheduled, never the outputs.
    """
    res = execute(spec, workers)
    run_dir = Path(out) / f"{spec.kind}-{spec.digest()}"
    run_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(run_dir / "spec.json", spec.canonical_json() + "\n")
    _atomic_write(run_dir / "results.csv", res.csv_text())
    _atomic_write(run_dir / "summary.json",
                  json.dumps(_jsonable(res.summary), indent=2, sort_keys=True) + "\n")
    if res.samples is not None:
        _atomic_write(run_dir / "samples.txt", "\n".join(res.samples) + "\n")
    _atomic_write(run_dir / "timing.csv",
                  "label,seconds\n" + "".join(f"{k},{v:.6f}\n" for k, v in res.timing))
    return run_dir
