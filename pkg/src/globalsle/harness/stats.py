"""Statistics shared by the experiments: two-sample tests, QV slopes, result tables."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from ..conformal import mobius_zero_infinity, RectangleMap
from ..errors import DegenerateSegmentError, DomainError, StatisticsError
from ..loewner import Curve, extract_driver, quadratic_variation


@dataclass(frozen=True)
class KSResult:
    statistic: float
    pvalue: float
    level: float

    @property
    def passed(self) -> bool:
        return self.pvalue >= self.level


def ks_two_sample(a, b, level: float = 0.01) -> KSResult:
    """Two-sample Kolmogorov-Smirnov statistic with its asymptotic p-value."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both samples must be nonempty")
    res = sps.ks_2samp(a, b, method="asymp")
    return KSResult(float(res.statistic), float(res.pvalue), level)


@dataclass(frozen=True)
class SlopeEstimate:
    value: float
    stderr: float
    n_curves: int
    n_failed: int
    slopes: tuple = field(default=(), repr=False)


def _qv_slope(driver, grid_step: float, t_max: float | None) -> float:
    T = driver.capacity if t_max is None else min(t_max, driver.capacity)
    n = int(math.floor(T / grid_step + 1e-9))
    if n < 2:
        raise DegenerateSegmentError("driver too short for the QV grid")
    grid = grid_step * np.arange(n + 1)
    t, qv = quadratic_variation(driver, grid)
    # least squares through the origin
    return float(np.dot(t, qv) / np.dot(t, t))


def driver_qv_slope(curves, grid_step: float = 0.01, t_max: float | None = None, max_failure: float = 0.1,
                    n_steps: int | None = None) -> SlopeEstimate:
    """Mean over curves of the regression slope of cumulative driver QV on capacity.

    The curves must start on the real line; each is unzipped, its driver is
    sampled on a uniform grid of ``grid_step`` up to ``t_max`` (or its
    capacity), and the cumulative QV is regressed through the origin.
    """
    curves = list(curves)
    if len(curves) < 10:
        raise ValueError("driver_qv_slope needs at least 10 curves")
    slopes, failed = [], 0
    for c in curves:
        try:
            driver = extract_driver(c, n_steps=n_steps)
            slopes.append(_qv_slope(driver, grid_step, t_max))
        except (DomainError, DegenerateSegmentError, FloatingPointError):
            failed += 1
    if failed > max_failure * len(curves):
        raise StatisticsError(f"driver extraction failed for {failed} of {len(curves)} curves")
    s = np.asarray(slopes)
    return SlopeEstimate(float(s.mean()), float(s.std(ddof=1) / math.sqrt(len(s))), len(s), failed, tuple(s))


def lattice_curve_to_halfplane(points, ell: float = 1.0) -> Curve:
    """Map a curve of ``[0, ell] x [0, 1]`` to the half-plane, start to 0 and end to infinity.

    The end point itself is dropped since it goes to infinity.  A lattice path
    may visit its end vertex before finishing; it is cut at the first visit.
    """
    pts = np.asarray(points, dtype=complex)
    first = int(np.flatnonzero(np.abs(pts - pts[-1]) < 1e-12)[0])
    pts = pts[:first + 1]
    if len(pts) < 2:
        raise DomainError("curve has coincident endpoints")
    rect = RectangleMap(ell)
    img = np.asarray(rect(pts), dtype=complex)
    if not (np.all(np.isfinite(img[[0, -1]])) and np.all(np.abs(img[[0, -1]]) < 1e12)):
        raise DomainError("curve endpoints must avoid the pole of the rectangle map")
    start, end = img[0].real, img[-1].real
    mob = mobius_zero_infinity(start, end)
    out = np.asarray(mob(img[:-1]), dtype=complex)
    out[0] = 0.0
    return Curve(out.real + 1j * np.maximum(out.imag, 0.0))


def lattice_qv_window(start: complex, end: complex, ell: float = 1.0, intervals: int = 10) -> tuple:
    """``(grid_step, t_max)`` for QV slopes of lattice curves from ``start`` to ``end``.

    ``t_max`` is the capacity of the straight segment from ``start`` to the
    centre of the rectangle after :func:`lattice_curve_to_halfplane`, so the
    window stops at macroscopic scale instead of running into the lattice
    magnified near ``end``.
    """
    seg = np.append(np.linspace(complex(start), 0.5 * ell + 0.5j, 64), complex(end))
    t_max = extract_driver(lattice_curve_to_halfplane(seg, ell)).capacity
    return t_max / intervals, t_max


@dataclass
class ResultTable:
    """Rows ``{experiment, params, estimate, stderr, count}`` with deterministic JSON output."""

    rows: list = field(default_factory=list)

    def add(self, experiment: str, params: dict, estimate: float, stderr: float, count: int, **extra) -> None:
        if stderr < 0 or not count > 0:
            raise ValueError("standard errors must be nonnegative and counts positive")
        row = {"experiment": experiment, "params": params, "estimate": float(estimate),
               "stderr": float(stderr), "count": int(count)}
        row.update(extra)
        self.rows.append(row)

    def sorted_rows(self) -> list:
        return sorted(self.rows, key=lambda r: json.dumps([r["experiment"], r["params"]], sort_keys=True))

    def to_json(self) -> str:
        return json.dumps({"rows": self.sorted_rows()}, indent=1, sort_keys=True)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")

    def merge(self, other: "ResultTable") -> "ResultTable":
        return ResultTable(self.rows + other.rows)
