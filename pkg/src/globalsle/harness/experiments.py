"""Replica farming and the lattice connectivity tables."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..combinatorics import enumerate_patterns
from ..errors import StatisticsError, TracingError
from ..ising import default_burn_in as ising_burn_in
from ..ising import classify_pattern, sample_critical_ising, trace_interfaces
from ..lattice import build_rectangle
from ..randomcluster import classify_fk_pattern, default_burn_in as fk_burn_in, sample_critical_fk, \
    trace_fk_interfaces
from .config import ExperimentConfig
from .stats import ResultTable


def replica_seed(master: int, index: int) -> int:
    """Seed of replica ``index``: first word of ``SeedSequence([master, index])``."""
    return int(np.random.SeedSequence([int(master), int(index)]).generate_state(1)[0])


def run_replicas(fn, config: ExperimentConfig, count: int | None = None) -> list:
    """``fn(config, seed)`` for every replica; results are ordered by replica index."""
    n = config.replicas if count is None else count
    jobs = [(fn, config, replica_seed(config.seed, r)) for r in range(n)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as ex:
            return list(ex.map(_call, jobs))
    return [_call(j) for j in jobs]


def _call(job):
    fn, config, seed = job
    return fn(config, seed)


def connectivity_replica(config: ExperimentConfig, seed: int):
    """Link pattern of one sample, or ``None`` if tracing failed."""
    poly = build_rectangle(config.ell, config.delta, config.marks)
    try:
        if config.kind == "ising-connectivity":
            sweeps = config.sweeps or ising_burn_in(poly)
            cfg = sample_critical_ising(poly, sweeps, seed)
            return classify_pattern(trace_interfaces(cfg)).encode()
        q = 2.0 if config.q is None else config.q
        sweeps = config.sweeps or fk_burn_in(poly, config.method)
        cfg = sample_critical_fk(poly, q, sweeps, seed, method=config.method)
        return classify_fk_pattern(trace_fk_interfaces(cfg)).encode()
    except TracingError:
        return None


def estimate_connectivity(config: ExperimentConfig) -> ResultTable:
    """Empirical ``P[A = alpha]`` over all link patterns, with binomial errors."""
    if config.kind not in ("ising-connectivity", "fk-connectivity"):
        raise ValueError("estimate_connectivity needs an ising- or fk-connectivity config")
    n_links = len(config.marks) // 2
    if n_links < 1 or len(config.marks) % 2:
        raise ValueError("need an even, positive number of marks")
    results = run_replicas(connectivity_replica, config)
    accepted = [r for r in results if r is not None]
    if not accepted:
        raise StatisticsError("no replica produced a classified sample")
    n = len(accepted)
    table = ResultTable()
    base = {"delta": config.delta, "ell": config.ell, "marks": list(config.marks), "seed": config.seed}
    if config.kind == "fk-connectivity":
        base.update(q=2.0 if config.q is None else config.q, method=config.method)
    for alpha in enumerate_patterns(n_links):
        hits = accepted.count(alpha.encode())
        p = hits / n
        table.add(config.kind, dict(base, pattern=alpha.encode()), p, math.sqrt(p * (1 - p) / n), n, hits=hits,
                  rejected=len(results) - n)
    return table
