"""Acceptance criteria 1-11, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line (also collected in the
terminal summary) before asserting.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from globalsle.combinatorics import LinkPattern, catalan, enumerate_patterns
from globalsle.conformal import (RectangleMap, make_parameters, mobius_between, poisson_kernel_halfplane,
                                 poisson_kernel_rectangle)
from globalsle.errors import GeometryError, SwallowedError
from globalsle.harness.stats import driver_qv_slope, ks_two_sample, lattice_curve_to_halfplane, lattice_qv_window
from globalsle.ising import (BETA_C, classify_pattern, default_burn_in, dobrushin_square, run_heat_bath,
                             sample_critical_ising, spin_config, trace_interfaces)
from globalsle.lattice import DiscretePolygon, build_rectangle
from globalsle.loewner import (DrivingFunction, extract_driver, hull_derivative, sample_chordal_sle, solve_forward)
from globalsle.multisle import (n_kappa, resample_step, run_resampling_chain, signed_area_statistic,
                                state_from_rectangle)
from globalsle.partition import check_total_bound, collapse_products, z_alpha_rectangle_83
from globalsle.randomcluster import (bond_config, critical_p, default_burn_in as fk_burn_in, run_fk,
                                     sample_critical_fk, trace_fk_interfaces)


def report(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert ok, line


# ---------------------------------------------------------------------------- 1


def test_criterion_01_catalan_counts():
    t = time.perf_counter()
    sizes = [len(enumerate_patterns(n)) for n in range(1, 6)]
    dt = time.perf_counter() - t
    ok = sizes == [1, 2, 5, 14, 42] == [catalan(n) for n in range(1, 6)] and dt < 1.0
    report(1, ok, f"sizes {sizes}, N=4 gives {sizes[3]} patterns, {dt:.3f} s")


# ---------------------------------------------------------------------------- 2


def test_criterion_02_partition_inequalities():
    t = time.perf_counter()
    rng = np.random.default_rng(2)
    failures = 0
    for n, kappa in itertools.product((2, 3, 4), (2.0, 3.0, 4.0)):
        h = make_parameters(kappa).h
        for _ in range(1000):
            x = np.sort(rng.uniform(0.0, 10.0, 2 * n))
            failures += not check_total_bound(tuple(x), h, kappa).passed
            failures += sum(collapse_products(tuple(x), h, k) > 1.0 + 1e-12 for k in range(1, 2 * n))
    x = (0, 1, 2, 3)
    rep = check_total_bound(tuple(map(float, x)), 1.0)
    # rational oracle with h = 1: link products summed over patterns, and 3!! times the alternating product
    lhs = sum(math.prod(Fraction(1, (x[b - 1] - x[a - 1]) ** 2) for a, b in alpha.links)
              for alpha in enumerate_patterns(2))
    rhs = 3 * math.prod(Fraction(x[j] - x[i]) ** (2 * (-1) ** (j - i)) for i, j in itertools.combinations(range(4), 2))
    exact = (lhs, rhs) == (Fraction(10, 9), Fraction(16, 3))
    exact = exact and abs(rep.lhs - float(lhs)) < 1e-12 and abs(rep.rhs - float(rhs)) < 1e-12
    dt = time.perf_counter() - t
    report(2, failures == 0 and exact and dt < 10.0,
           f"{failures} failures over 9000 configs, instance lhs={rep.lhs:.6f} rhs={rep.rhs:.6f}, {dt:.1f} s")


# ---------------------------------------------------------------------------- 3


def test_criterion_03_loewner_round_trip():
    t0 = time.perf_counter()
    d = DrivingFunction(np.linspace(0.0, 1.0, 101), np.zeros(101))
    closed = 0.0
    for z in (1j, 0.3 + 0.2j, -2 + 1j, 5j, 1.5 + 0.01j):
        ref = np.sqrt(z * z + 4.0)
        # branch with g(z) ~ z at infinity
        ref = ref if ref.imag > 0 or (ref.imag == 0 and z.real >= 0) else -ref
        closed = max(closed, abs(solve_forward(d, z) - ref))
    T = 1.0
    curve, driver = sample_chordal_sle(make_parameters(3.0), T, 1e-4, 3, return_driver=True)
    back = extract_driver(curve)
    grid = np.linspace(0.0, 0.999 * T, 2000)
    sup = float(np.max(np.abs(back.at(grid) - driver.at(grid))))
    hull = curve.points
    probes = np.concatenate([np.linspace(hull.real.min() - 5, hull.real.min() - 1e-3, 500),
                             np.linspace(hull.real.max() + 1e-3, hull.real.max() + 5, 500)])
    vals = []
    for x in probes:
        try:
            vals.append(hull_derivative(driver, x))
        except SwallowedError:
            pass
    vals = np.asarray(vals)
    slit = hull_derivative(DrivingFunction(np.linspace(0.0, 1.0, 1001), np.zeros(1001)), 2.0)
    dt = time.perf_counter() - t0
    ok = (closed < 1e-6 and sup < 0.05 * math.sqrt(T) and len(vals) >= 900 and np.all((vals > 0) & (vals <= 1))
          and abs(slit - 1 / math.sqrt(2)) < 1e-9 and dt < 60)
    report(3, ok, f"closed form err {closed:.1e}, round trip sup {sup:.1e} (< {0.05 * math.sqrt(T):.3f}), "
                  f"{len(vals)} probes in (0,1], slit {slit:.12f}, {dt:.1f} s")


# ---------------------------------------------------------------------------- 4


def test_criterion_04_sle_identification():
    rows, ok = [], True
    for kappa in (2.0, 8 / 3, 3.0, 4.0):
        p = make_parameters(kappa)
        est = driver_qv_slope([sample_chordal_sle(p, 1.0, 1e-3, 4000 + s) for s in range(100)])
        err = abs(est.value - kappa) / kappa
        ok &= err < 0.05
        rows.append(f"{kappa:.3f}->{est.value:.3f}+-{est.stderr:.3f}")
    report(4, ok, "QV slopes " + ", ".join(rows))


# ---------------------------------------------------------------------------- 5


def test_criterion_05_conformal_layer():
    rng = np.random.default_rng(5)
    worst, checked = 0.0, 0
    while checked < 1000:
        a, b = rng.uniform(-5, 5, 2)
        x, y = rng.uniform(-5, 5, 2)
        if abs(b - a) < 1e-2 or abs(x - y) < 1e-2:
            continue
        m = mobius_between(a, b, rng.uniform(0.1, 10))
        if min(abs(m.c * x + m.d), abs(m.c * y + m.d)) < 1e-2:
            continue
        lhs = abs(m.derivative(x)) * abs(m.derivative(y)) * poisson_kernel_halfplane(m(x).real, m(y).real)
        worst = max(worst, abs(lhs / poisson_kernel_halfplane(x, y) - 1))
        checked += 1
    bad = 0
    for _ in range(100):
        ell = rng.uniform(0.5, 3)
        x, y = np.sort(rng.uniform(0.05, ell - 0.05, 2))
        h_rect = poisson_kernel_rectangle(ell, x, y)
        ext_l, ext_r = rng.uniform(0, 1, 2)
        big = poisson_kernel_rectangle(ell + ext_l + ext_r, x, y, offset=-ext_l)
        bad += poisson_kernel_halfplane(x, y) < h_rect - 1e-10
        bad += big < h_rect - 1e-10
    report(5, worst < 1e-10 and bad == 0,
           f"covariance worst rel err {worst:.1e} over 1000 maps, {bad} monotonicity violations over 100 nested pairs")


# ---------------------------------------------------------------------------- 6


def _dobrushin_slope(paths):
    # orient every interface from the bottom mark, then stop the QV window at macroscopic scale
    curves = [q.points if q.start_mark == 1 else q.points[::-1] for q in paths]
    grid_step, t_max = lattice_qv_window(curves[0][0], curves[0][-1], intervals=10)
    return driver_qv_slope([lattice_curve_to_halfplane(c) for c in curves], grid_step=grid_step, t_max=t_max)


def test_criterion_06_lattice_to_continuum():
    # soft target: 20% at mesh 1/64
    poly = dobrushin_square(64)
    ising = []
    for r in range(200):
        (path,) = trace_interfaces(sample_critical_ising(poly, default_burn_in(poly), 6000 + r))
        ising.append(path)
    fk = []
    for r in range(200):
        cfg = sample_critical_fk(poly, 2.0, fk_burn_in(poly, "edwards-sokal"), 7000 + r, method="edwards-sokal")
        fk.append(trace_fk_interfaces(cfg).interfaces[0])
    si, sf = _dobrushin_slope(ising), _dobrushin_slope(fk)
    k_fk = 16 / 3
    ok = abs(si.value - 3) < 0.2 * 3 and abs(sf.value - k_fk) < 0.2 * k_fk
    report(6, ok, f"mesh 1/64: Ising {si.value:.3f}+-{si.stderr:.3f} (target 3), "
                  f"FK q=2 {sf.value:.3f}+-{sf.stderr:.3f} (target {k_fk:.3f}), 200 replicas each")


# ---------------------------------------------------------------------------- 7

ELL = 2.0
PER = 2 * ELL + 2
FRACTIONS = (0.5 / PER, 1.5 / PER, 3.5 / PER, 4.5 / PER)
POLE = 1.0 / PER  # bottom midpoint, between the first two marks
CROSSING = LinkPattern(((1, 4), (2, 3)))


def _polyline(corners, n=40):
    corners = np.asarray(corners, dtype=complex)
    out = [corners[:1]] + [np.linspace(a, b, n)[1:] for a, b in zip(corners[:-1], corners[1:])]
    return np.concatenate(out)


def test_criterion_07_uniqueness_phenomenon():
    p3 = make_parameters(3.0)
    # curves hugging the left and right sides, against both curves squeezed into the middle
    outer = [_polyline([0.5, 0.05 + 0.05j, 0.05 + 0.95j, 0.5 + 1j]),
             _polyline([1.5, 1.95 + 0.05j, 1.95 + 0.95j, 1.5 + 1j])]
    inner = [_polyline([0.5, 0.97 + 0.05j, 0.97 + 0.95j, 0.5 + 1j]),
             _polyline([1.5, 1.03 + 0.05j, 1.03 + 0.95j, 1.5 + 1j])]
    burn, steps, thin, chains = 200, 1500, 3, 4
    ensembles = []
    for base, curves in ((100, outer), (200, inner)):
        start = state_from_rectangle(p3, ELL, POLE, FRACTIONS, CROSSING, curves)
        stats = []
        for c in range(chains):
            traj = run_resampling_chain(start, burn + steps, base + c, resolution=0.03, eps=0.05)
            stats.extend(signed_area_statistic(s) for s in traj[burn + thin::thin])
        ensembles.append(np.asarray(stats))
    ks = ks_two_sample(*ensembles)
    report(7, ks.statistic < 0.05 and min(map(len, ensembles)) >= 500,
           f"KS distance {ks.statistic:.4f} (< 0.05) after {burn} steps, {len(ensembles[0])} samples per start")


# ---------------------------------------------------------------------------- 8


def test_criterion_08_definition_consistency():
    p3 = make_parameters(3.0)
    poly = build_rectangle(ELL, 1 / 16, FRACTIONS)
    fractions = tuple(m / poly.n_boundary for m in poly.marks)
    states = []
    for r in range(300):
        cfg = sample_critical_ising(poly, default_burn_in(poly), 8000 + r)
        paths = trace_interfaces(cfg)
        if classify_pattern(paths) != CROSSING:
            continue
        curves = {}
        for q in paths:
            lo, hi = sorted((q.start_mark, q.end_mark))
            pts = q.points if q.start_mark == lo else q.points[::-1]
            ends = [poly.vertex_point(poly.mark_vertex(lo)), poly.vertex_point(poly.mark_vertex(hi))]
            curves[(lo, hi)] = np.concatenate([ends[:1], pts, ends[1:]])
        states.append(state_from_rectangle(p3, ELL, POLE, fractions, CROSSING, [curves[l] for l in CROSSING.links]))
    rng = np.random.default_rng(8)
    before, after, failed = [], [], 0
    for s in states:
        try:
            new = resample_step(s, int(rng.integers(s.n)), rng)
        except GeometryError:
            failed += 1
            continue
        before.append(signed_area_statistic(s))
        after.append(signed_area_statistic(new))
    ks = ks_two_sample(before, after, level=0.01)
    report(8, ks.passed and failed <= 0.05 * len(states),
           f"{len(before)} conditioned Ising states (mesh 1/16), KS p={ks.pvalue:.3f} (>= 0.01), "
           f"{failed} geometry rejections")


# ---------------------------------------------------------------------------- 9


def _ising_exact(cfg):
    free = np.flatnonzero(~cfg.fixed)
    ends = cfg.polygon.edge_endpoints
    mean, z = np.zeros(len(free)), 0.0
    for bits in itertools.product((-1, 1), repeat=len(free)):
        s = cfg.spins.copy()
        s[free] = bits
        w = math.exp(BETA_C * np.sum(s[ends[:, 0]] * s[ends[:, 1]]))
        z += w
        mean += w * np.asarray(bits)
    return free, mean / z


def _fk_exact(poly, q, pe):
    n_e = poly.n_edges
    states = ((np.arange(2 ** n_e)[:, None] >> np.arange(n_e)) & 1).astype(np.uint8)
    logw = np.empty(len(states))
    for s, om in enumerate(states):
        k = bond_config(poly, q, p_edge=pe, wiring="free", omega=om).n_clusters()
        o = int(om.sum())
        logw[s] = o * math.log(pe) + (n_e - o) * math.log1p(-pe) + k * math.log(q)
    w = np.exp(logw - logw.max())
    return (w[:, None] * states).sum(0) / w.sum()


def _batch_means(step, n_sweeps, n_batch=100):
    per = n_sweeps // n_batch
    out = np.array([np.mean([step() for _ in range(per)], axis=0) for _ in range(n_batch)])
    return out.mean(0), out.std(0, ddof=1) / math.sqrt(n_batch)


def test_criterion_09_sampler_oracles():
    sweeps = 100_000
    # 3 x 3 free spins with Dobrushin boundary
    poly = DiscretePolygon(4, 4, 0.25, (2, 10))
    cfg = spin_config(poly)
    free, exact = _ising_exact(cfg)
    rng = np.random.default_rng(9)
    run_heat_bath(cfg, 100, rng)
    est, se = _batch_means(lambda: run_heat_bath(cfg, 1, rng).spins[free].astype(float), sweeps)
    z_ising = float(np.max(np.abs(est - exact) / se))
    # 2 x 3 cells, free boundary, 17 edges
    fpoly = DiscretePolygon(2, 3, 1 / 3)
    exact_fk = _fk_exact(fpoly, 2.0, critical_p(2.0))
    bonds = bond_config(fpoly, 2.0, wiring="free")
    run_fk(bonds, 100, rng)
    est, se = _batch_means(lambda: run_fk(bonds, 1, rng).omega.astype(float), sweeps)
    z_fk = float(np.max(np.abs(est - exact_fk) / se))
    report(9, z_ising < 3 and z_fk < 3,
           f"max |est-exact|/se: Ising 3x3 {z_ising:.2f}, FK 2x3 {z_fk:.2f} (< 3) at {sweeps} sweeps")


# ---------------------------------------------------------------------------- 10


def test_criterion_10_f_alpha_83():
    h = make_parameters(8 / 3).h
    samples = 500
    big_ell, small_ell, shift = 3.0, 2.0, 0.5
    xs = np.array([1.0, 1.4, 1.8, 2.2])
    lines, ok = [], True
    for k, alpha in enumerate(enumerate_patterns(2)):
        big = z_alpha_rectangle_83(big_ell, xs + 0j, alpha, samples, 100 + k)
        small = z_alpha_rectangle_83(small_ell, xs - shift + 0j, alpha, samples, 200 + k)
        for est in (big, small):
            f = est.meta["f_alpha"]
            ok &= 0 < f <= 1
            ok &= est.value <= est.meta["kernel_product"] + 3 * est.stderr
        slack = 3 * math.hypot(big.stderr, small.stderr)
        ok &= small.value <= big.value + slack
        lines.append(f"{alpha.encode()}: Z_U={small.value:.4g} <= Z_Omega={big.value:.4g} (+{slack:.2g}), "
                     f"f={small.meta['f_alpha']:.3f}/{big.meta['f_alpha']:.3f}")
    report(10, ok, "; ".join(lines))


# ---------------------------------------------------------------------------- 11


def test_criterion_11_n_kappa():
    got = [n_kappa(k) for k in (16 / 3, 5.0, 6.0)]
    report(11, got == [3, 3, 4], f"n_kappa(16/3, 5, 6) = {got}")
