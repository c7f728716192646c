"""Numerical Loewner evolution with vertical-slit discretization.

A driver is stored as piecewise constant: ``values[k]`` holds on
``[times[k], times[k+1])`` and the terminal value repeats the last one.  Each
step is the exact slit map ``z -> W + sqrt((z - W)**2 + 4 dt)``, so curves
generated from a driver and drivers unzipped from those curves agree to
rounding error.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numba as nb
import numpy as np

from .conformal import Parameters, mobius_between
from .errors import DegenerateSegmentError, DomainError, SwallowedError

log = logging.getLogger(__name__)

SWALLOW_TOL = 1e-9


@dataclass
class DrivingFunction:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1 or len(self.times) < 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if self.times[0] != 0.0:
            raise ValueError("driver times must start at 0")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("driver times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("driver values must be finite")

    @property
    def capacity(self) -> float:
        return float(self.times[-1])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.times)

    def at(self, t):
        """Piecewise-constant (right-continuous) evaluation."""
        idx = np.searchsorted(self.times, t, side="right") - 1
        return self.values[np.clip(idx, 0, len(self.values) - 1)]

    def concatenate(self, other: "DrivingFunction") -> "DrivingFunction":
        """Run ``other`` after ``self`` (``other`` is shifted in time only)."""
        t = np.concatenate([self.times, self.capacity + other.times[1:]])
        v = np.concatenate([self.values[:-1], other.values])
        return DrivingFunction(t, v)


@dataclass
class Curve:
    points: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        if len(pts) == 0:
            raise ValueError("a curve needs at least one point")
        if np.any(pts.imag < -1e-9 * max(1.0, float(np.abs(pts).max()))):
            raise DomainError("curve leaves the closed upper half-plane")
        keep = np.ones(len(pts), dtype=bool)
        keep[1:] = pts[1:] != pts[:-1]
        self.points = pts[keep]

    def __len__(self):
        return len(self.points)

    @property
    def start(self) -> complex:
        return complex(self.points[0])

    @property
    def end(self) -> complex:
        return complex(self.points[-1])


# ----------------------------------------------------------------------------
# kernels


@nb.njit(cache=True)
def _branch_sqrt(w, s):
    # sqrt(w**2 + s) on the branch with Im >= 0, real results signed like Re(w)
    r = np.sqrt(w * w + s)
    if r.imag < 0.0 or (r.imag == 0.0 and w.real < 0.0):
        r = -r
    return r


@nb.njit(cache=True)
def _forward_point(z, W, dt, tol):
    # returns image and index of swallowing step (-1 if never)
    is_real = z.imag == 0.0
    for k in range(len(dt)):
        w = z - W[k]
        if abs(w) < tol:
            return z, k
        if is_real and k > 0:
            prev = z - W[k - 1]
            if (prev.real > 0.0) != (w.real > 0.0):
                return z, k
        r = _branch_sqrt(w, 4.0 * dt[k])
        if is_real:
            r = complex(r.real, 0.0)
        z = W[k] + r
    return z, -1


@nb.njit(cache=True)
def _real_derivative(x, W, dt, tol):
    d = 1.0
    for k in range(len(dt)):
        w = x - W[k]
        if abs(w) < tol:
            return d, x, k
        if k > 0 and ((x - W[k - 1]) > 0.0) != (w > 0.0):
            return d, x, k
        r = np.sqrt(w * w + 4.0 * dt[k])
        if w < 0.0:
            r = -r
        d *= w / r
        x = W[k] + r
    return d, x, -1


@nb.njit(cache=True)
def _backward_points(W, dt, idx):
    # gamma(t_n) = h_0 o ... o h_{n-1}(W_{n-1}) for n in idx, where h_k inverts step k
    out = np.empty(len(idx), dtype=np.complex128)
    for j in range(len(idx)):
        n = idx[j]
        if n == 0:
            out[j] = complex(W[0], 0.0)
            continue
        z = complex(W[n - 1], 0.0)
        for k in range(n - 1, -1, -1):
            z = W[k] + _branch_sqrt(z - W[k], -4.0 * dt[k])
        out[j] = z
    return out


@nb.njit(cache=True)
def _pull_back(z0, W, dt):
    out = z0.copy()
    for j in range(len(out)):
        z = out[j]
        for k in range(len(dt) - 1, -1, -1):
            z = W[k] + _branch_sqrt(z - W[k], -4.0 * dt[k])
        out[j] = z
    return out


@nb.njit(cache=True)
def _push_forward(z0, W, dt):
    out = z0.copy()
    for j in range(len(out)):
        z = out[j]
        real = z.imag == 0.0
        for k in range(len(dt)):
            r = _branch_sqrt(z - W[k], 4.0 * dt[k])
            if real:
                r = complex(r.real, 0.0)
            z = W[k] + r
        out[j] = z
    return out


@nb.njit(cache=True)
def _zip(points, extra, tol):
    # vertical-slit zipper; returns slit positions, capacities, skipped count and
    # the images of `extra` under the full map
    z = points.copy()
    ex = extra.copy()
    n = len(z)
    a = np.empty(n - 1)
    cap = np.empty(n - 1)
    m = 0
    skipped = 0
    total = 0.0
    for k in range(1, n):
        w = z[k]
        b = w.imag
        if b < 0.0:
            if b < -tol:
                return a[:m], cap[:m], skipped, ex, k
            b = 0.0
        d = 0.25 * b * b
        # steps too small to advance the capacity clock are degenerate
        if d <= 0.0 or total + d == total:
            skipped += 1
            continue
        total += d
        x = w.real
        a[m] = x
        cap[m] = d
        m += 1
        for i in range(k + 1, n):
            z[i] = x + _branch_sqrt(z[i] - x, 4.0 * d)
        for i in range(len(ex)):
            r = _branch_sqrt(ex[i] - x, 4.0 * d)
            if ex[i].imag == 0.0:
                r = complex(r.real, 0.0)
            ex[i] = x + r
    return a[:m], cap[:m], skipped, ex, -1


@nb.njit(cache=True)
def _frechet(p, q):
    n, m = len(p), len(q)
    ca = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            d = abs(p[i] - q[j])
            if i == 0 and j == 0:
                ca[i, j] = d
            elif i == 0:
                ca[i, j] = max(ca[i, j - 1], d)
            elif j == 0:
                ca[i, j] = max(ca[i - 1, j], d)
            else:
                ca[i, j] = max(min(ca[i - 1, j], ca[i - 1, j - 1], ca[i, j - 1]), d)
    return ca[n - 1, m - 1]


# ----------------------------------------------------------------------------
# public operations


def _steps(driver: DrivingFunction):
    return np.ascontiguousarray(driver.values[:-1]), np.ascontiguousarray(driver.steps)


def solve_forward(driver: DrivingFunction, z: complex, tol: float = SWALLOW_TOL) -> complex:
    """``g_T(z)`` for the hull generated by ``driver``.

    Raises :class:`SwallowedError` (carrying the step and time) if ``z`` is
    swallowed before the terminal time.
    """
    z = complex(z)
    if z.imag < 0:
        raise DomainError("z must lie in the closed upper half-plane")
    W, dt = _steps(driver)
    out, k = _forward_point(z, W, dt, tol)
    if k >= 0:
        raise SwallowedError(f"{z} swallowed at step {k}", step=k, time=float(driver.times[k]))
    return complex(out)


def hull_derivative(driver: DrivingFunction, x: float, tol: float = SWALLOW_TOL) -> float:
    """``g_T'(x)`` for a real point outside the hull; lies in ``(0, 1]``."""
    W, dt = _steps(driver)
    d, _, k = _real_derivative(float(x), W, dt, tol)
    if k >= 0:
        raise SwallowedError(f"{x} swallowed at step {k}", step=k, time=float(driver.times[k]))
    return float(d)


def curve_from_driver(driver: DrivingFunction, stride: int = 1) -> Curve:
    """Trace of the hull tips ``gamma(t_n)`` for every ``stride``-th step."""
    W, dt = _steps(driver)
    n = len(dt)
    idx = np.arange(0, n + 1, max(1, int(stride)))
    if idx[-1] != n:
        idx = np.append(idx, n)
    pts = _backward_points(W, dt, idx.astype(np.int64))
    return Curve(pts, {"capacity": driver.capacity})


def brownian_driver(kappa: float, times: np.ndarray, rng: np.random.Generator, start: float = 0.0) -> DrivingFunction:
    times = np.asarray(times, dtype=float)
    dt = np.diff(times)
    inc = rng.standard_normal(len(dt)) * np.sqrt(kappa * dt)
    if not np.all(np.isfinite(inc)):
        raise FloatingPointError("non-finite driver increments")
    values = np.empty(len(times))
    values[0] = start
    values[1:] = start + np.cumsum(inc)
    # piecewise constant: the terminal value repeats the last active one
    values[-1] = values[-2] if len(values) > 1 else start
    return DrivingFunction(times, values)


def sample_chordal_sle(params: Parameters, T: float, dt: float, seed: int,
                       stride: int = 1, return_driver: bool = False):
    """Chordal SLE from 0 to infinity up to half-plane capacity ``T``."""
    if not (T > 0 and dt > 0 and dt <= T):
        raise ValueError("need 0 < dt <= T")
    n = int(round(T / dt))
    times = np.linspace(0.0, T, n + 1)
    driver = brownian_driver(params.kappa, times, np.random.default_rng(seed))
    curve = curve_from_driver(driver, stride)
    curve.meta.update(kappa=params.kappa, seed=seed, capacity=T)
    return (curve, driver) if return_driver else curve


def log_time_grid(t_min: float, t_max: float, eps: float) -> np.ndarray:
    """Uniform steps ``eps * t_min`` up to ``t_min`` then geometric ratio ``1 + eps``."""
    head = np.linspace(0.0, t_min, int(np.ceil(1.0 / eps)) + 1)
    n_geo = int(np.ceil(np.log(t_max / t_min) / np.log1p(eps)))
    tail = t_min * (1.0 + eps) ** np.arange(1, n_geo + 1)
    return np.concatenate([head, tail])


def sample_sle_between(params: Parameters, a: float, b: float, seed, resolution: float = 1e-2,
                       eps: float = 0.02, stride: int = 1) -> Curve:
    """Chordal SLE in the half-plane from real ``a`` to real ``b``.

    An SLE towards infinity on a logarithmic capacity grid is pushed through
    the automorphism ``0 -> a, inf -> b``.  ``resolution`` is the relative size
    of the neighbourhoods of the endpoints left to straight closing segments.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    t_min = 0.25 * resolution ** 2
    t_max = 0.25 / resolution ** 2
    driver = brownian_driver(params.kappa, log_time_grid(t_min, t_max, eps), rng)
    pts = curve_from_driver(driver, stride).points
    mob = mobius_between(a, b)
    img = np.asarray(mob(pts))
    img[0] = a
    img = np.append(img, b)
    return Curve(img, {"kappa": params.kappa, "from": a, "to": b})


def extract_driver(curve: Curve, n_steps: int | None = None, extra=None, return_images: bool = False):
    """Unzip ``curve`` with vertical slits.

    ``n_steps`` (optional) subsamples the polyline to that many segments.  The
    curve must start on the real line.  Points whose slit capacity vanishes are
    skipped.  With ``extra`` points the images of those points under the full
    unzipping map are returned as well.
    """
    pts = np.asarray(curve.points, dtype=complex)
    if n_steps is not None and n_steps < len(pts) - 1:
        idx = np.unique(np.round(np.linspace(0, len(pts) - 1, n_steps + 1)).astype(int))
        pts = pts[idx]
    scale = max(1.0, float(np.abs(pts).max()))
    if abs(pts[0].imag) > 1e-9 * scale:
        raise DomainError("curve must start on the real line")
    if np.any(pts.imag < -1e-9 * scale):
        raise DomainError("curve leaves the closed upper half-plane")
    extra_arr = np.zeros(0, dtype=complex) if extra is None else np.asarray(extra, dtype=complex).ravel()
    a, cap, skipped, ex, bad = _zip(pts.astype(np.complex128), extra_arr.astype(np.complex128), 1e-7 * scale)
    if bad >= 0:
        raise DomainError(f"zipper image of point {bad} left the half-plane")
    if skipped:
        log.debug("zipper skipped %d degenerate points", skipped)
    if len(a) == 0:
        raise DegenerateSegmentError("curve has no segment of positive capacity")
    times = np.concatenate([[0.0], np.cumsum(cap)])
    values = np.concatenate([a, [a[-1]]])
    driver = DrivingFunction(times, values)
    if return_images:
        return driver, ex
    return driver


def push_forward(driver: DrivingFunction, z) -> np.ndarray:
    """Apply ``g_T`` to many points without swallowing checks."""
    W, dt = _steps(driver)
    return _push_forward(np.atleast_1d(np.asarray(z, dtype=np.complex128)), W, dt)


def pull_back(driver: DrivingFunction, z) -> np.ndarray:
    """Apply ``g_T^{-1}`` to points of the closed half-plane."""
    W, dt = _steps(driver)
    return _pull_back(np.atleast_1d(np.asarray(z, dtype=np.complex128)), W, dt)


def curve_distance(c1: Curve, c2: Curve) -> float:
    """Discrete Frechet distance between the two polylines."""
    return float(_frechet(np.asarray(c1.points, dtype=np.complex128), np.asarray(c2.points, dtype=np.complex128)))


def quadratic_variation(driver: DrivingFunction, grid: np.ndarray | None = None):
    """Cumulative squared increments of the driver, optionally on a coarser time grid."""
    if grid is None:
        t = driver.times
        w = driver.values
    else:
        t = np.asarray(grid, dtype=float)
        w = driver.at(t)
    qv = np.concatenate([[0.0], np.cumsum(np.diff(w) ** 2)])
    return t, qv


def is_simple(curve: Curve) -> bool:
    """No two non-adjacent segments of the polyline intersect."""
    from .geometry import polyline_self_intersects
    return not polyline_self_intersects(curve.points)


# ----------------------------------------------------------------------------
# file formats


def _header(meta: dict) -> str:
    cap = meta.get("capacity", "")
    kappa = meta.get("kappa", "")
    seed = meta.get("seed", "")
    return f"# capacity={cap} kappa={kappa} seed={seed}\n"


def _parse_header(line: str) -> dict:
    out = {}
    for item in line.lstrip("#").split():
        key, _, val = item.partition("=")
        if val == "":
            continue
        try:
            out[key] = int(val) if key == "seed" else float(val)
        except ValueError:
            out[key] = val
    return out


def write_curve(path, curve: Curve) -> None:
    with open(path, "w") as fh:
        fh.write(_header(curve.meta))
        for z in curve.points:
            fh.write(f"{float(z.real)!r} {float(z.imag)!r}\n")


def read_curve(path) -> Curve:
    lines = Path(path).read_text().splitlines()
    meta = _parse_header(lines[0]) if lines and lines[0].startswith("#") else {}
    data = np.loadtxt([l for l in lines if l and not l.startswith("#")], ndmin=2)
    return Curve(data[:, 0] + 1j * data[:, 1], meta)


def write_driver(path, driver: DrivingFunction, meta: dict | None = None) -> None:
    meta = dict(meta or {})
    meta.setdefault("capacity", driver.capacity)
    with open(path, "w") as fh:
        fh.write(_header(meta))
        for t, w in zip(driver.times, driver.values):
            fh.write(f"{float(t)!r} {float(w)!r}\n")


def read_driver(path) -> tuple[DrivingFunction, dict]:
    lines = Path(path).read_text().splitlines()
    meta = _parse_header(lines[0]) if lines and lines[0].startswith("#") else {}
    data = np.loadtxt([l for l in lines if l and not l.startswith("#")], ndmin=2)
    return DrivingFunction(data[:, 0], data[:, 1]), meta
