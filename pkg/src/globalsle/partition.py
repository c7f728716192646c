"""Pure and total SLE partition functions and the inequalities bounding them.

Every product of powers of point gaps is evaluated in log space.  The only
``f_alpha`` evaluated here is the ``kappa = 8/3`` one, where the loop-measure
term vanishes and ``f_alpha`` is the probability that independent chordal
SLEs between the paired points are pairwise disjoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .combinatorics import LinkPattern, double_factorial_odd, enumerate_patterns
from .conformal import make_parameters
from .errors import BoundsError, ProviderError
from .geometry import polylines_touch
from .loewner import sample_sle_between

KAPPA_83 = 8.0 / 3.0


@dataclass(frozen=True)
class BoundaryConfig:
    points: tuple

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        if len(pts) % 2 or not pts:
            raise ValueError("a boundary configuration needs an even, positive number of points")
        if any(not math.isfinite(p) for p in pts):
            raise ValueError("points must be finite")
        if any(b - a <= 1e-12 for a, b in zip(pts, pts[1:])):
            raise ValueError("points must be strictly increasing with gaps > 1e-12")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points) // 2

    def array(self) -> np.ndarray:
        return np.asarray(self.points)


def _as_config(x) -> BoundaryConfig:
    return x if isinstance(x, BoundaryConfig) else BoundaryConfig(tuple(x))


def log_alternating_product(x, h: float) -> float:
    pts = _as_config(x).array()
    i, j = np.triu_indices(len(pts), k=1)
    sign = np.where((j - i) % 2 == 0, 1.0, -1.0)
    return float(np.sum(2.0 * h * sign * np.log(pts[j] - pts[i])))


def alternating_product(x, h: float) -> float:
    """``prod_{i<j} (x_j - x_i)^{2h (-1)^{j-i}}``."""
    return math.exp(log_alternating_product(x, h))


def log_link_product(x, alpha: LinkPattern, h: float) -> float:
    pts = _as_config(x).array()
    return float(sum(-2.0 * h * math.log(abs(pts[b - 1] - pts[a - 1])) for a, b in alpha.links))


def nearest_pair_sum(x, h: float) -> float:
    """``sum over alpha in LP_N of prod_j |x_{b_j} - x_{a_j}|^{-2h}``."""
    cfg = _as_config(x)
    if cfg.n > 8:
        raise BoundsError("nearest_pair_sum supports N <= 8")
    logs = [log_link_product(cfg, alpha, h) for alpha in enumerate_patterns(cfg.n)]
    return float(math.exp(logsumexp(logs)))


@dataclass
class BoundReport:
    op: str
    n: int
    kappa: float | None
    lhs: float
    rhs: float
    passed: bool
    seed: int | None = None
    samples: int | None = None
    stderr: float | None = None

    def row(self) -> dict:
        return {"op": self.op, "N": self.n, "kappa": self.kappa, "lhs": self.lhs, "rhs": self.rhs,
                "pass": self.passed, "seed": self.seed, "samples": self.samples, "stderr": self.stderr}


def check_total_bound(x, h: float, kappa: float | None = None, slack: float = 1e-9) -> BoundReport:
    """Compare ``nearest_pair_sum`` against ``(2N-1)!!`` times the alternating product."""
    if h < 0:
        raise BoundsError("the total bound is stated for h >= 0")
    cfg = _as_config(x)
    lhs = nearest_pair_sum(cfg, h)
    rhs = double_factorial_odd(cfg.n) * alternating_product(cfg, h)
    return BoundReport("check_total_bound", cfg.n, kappa, lhs, rhs, lhs <= rhs * (1 + slack))


def cross_ratio(x1: float, x2: float, x3: float, x4: float) -> float:
    if not x1 < x2 < x3 < x4:
        raise ValueError("cross_ratio needs x1 < x2 < x3 < x4")
    return (x4 - x1) * (x3 - x2) / ((x3 - x1) * (x4 - x2))


def collapse_products(x, h: float, k: int) -> float:
    """``prod_{i != k, k+1} |(x_i - x_k) / (x_i - x_{k+1})|^{2h (-1)^{i+k+1}}``; ``k`` is 1-based."""
    pts = _as_config(x).array()
    n2 = len(pts)
    if not 1 <= k <= n2 - 1:
        raise BoundsError(f"k must lie in [1, {n2 - 1}]")
    xk, xk1 = pts[k - 1], pts[k]
    total = 0.0
    for i in range(1, n2 + 1):
        if i in (k, k + 1):
            continue
        xi = pts[i - 1]
        sign = 1.0 if (i + k + 1) % 2 == 0 else -1.0
        total += 2.0 * h * sign * (math.log(abs(xi - xk)) - math.log(abs(xi - xk1)))
    return math.exp(total)


def z_alpha_closed_n1(x, h: float) -> float:
    """One-curve pure partition function ``(x_2 - x_1)^{-2h}``."""
    cfg = _as_config(x)
    if cfg.n != 1:
        raise BoundsError("closed form available only for N = 1")
    x1, x2 = cfg.points
    return (x2 - x1) ** (-2.0 * h)


# ----------------------------------------------------------------------------
# Monte Carlo at kappa = 8/3


@dataclass
class Estimate:
    value: float
    stderr: float
    samples: int
    meta: dict = field(default_factory=dict)


def curves_disjoint(curves, guard: float = 0.5) -> bool:
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            if polylines_touch(curves[i].points, curves[j].points, guard):
                return False
    return True


def f_alpha_mc_83(x, alpha: LinkPattern, samples: int, seed: int,
                  resolution: float = 1e-2, eps: float = 0.02, guard: float = 0.5) -> Estimate:
    """Probability that independent chordal SLE(8/3) curves for ``alpha`` are disjoint.

    Disjointness is decided on polylines with a guard tube of ``guard`` times
    the local segment length, so the estimate depends on the resolution used.
    """
    cfg = _as_config(x)
    if cfg.n != alpha.n_links:
        raise ValueError("pattern size does not match the number of points")
    if cfg.n > 4:
        raise BoundsError("f_alpha_mc_83 supports N <= 4")
    if samples < 1:
        raise ValueError("need at least one sample")
    meta = {"resolution": resolution, "eps": eps, "guard": guard, "seed": seed}
    if cfg.n == 1:
        return Estimate(1.0, 0.0, samples, meta)
    params = make_parameters(KAPPA_83)
    rng = np.random.default_rng(seed)
    pts = cfg.points
    hits = 0
    for _ in range(samples):
        curves = [sample_sle_between(params, pts[a - 1], pts[b - 1], rng, resolution, eps)
                  for a, b in alpha.links]
        hits += curves_disjoint(curves, guard)
    p = hits / samples
    se = math.sqrt(max(p * (1 - p), 0.0) / samples)
    return Estimate(p, se, samples, meta)


# ----------------------------------------------------------------------------
# providers


@dataclass
class PartitionProvider:
    """Evaluator ``(points, pattern) -> Z_alpha > 0`` with a label."""

    evaluate: Callable[[BoundaryConfig, LinkPattern], float]
    label: str = "external"

    def __call__(self, x, alpha: LinkPattern) -> float:
        value = float(self.evaluate(_as_config(x), alpha))
        if not value > 0 or not math.isfinite(value):
            raise ProviderError(f"provider {self.label} returned {value}")
        return value


def closed_form_provider(kappa: float) -> PartitionProvider:
    h = make_parameters(kappa).h

    def evaluate(x, alpha):
        if alpha.n_links != 1:
            raise BoundsError("closed-form provider covers N = 1 only")
        return z_alpha_closed_n1(x, h)

    return PartitionProvider(evaluate, "closed-form-N1")


def mc_provider_83(samples: int, seed: int, floor: float = 0.5, **mc_kwargs) -> PartitionProvider:
    """``Z_alpha = f_alpha * prod H^h`` at ``kappa = 8/3`` with ``f_alpha`` by Monte Carlo.

    Every evaluation reuses ``seed`` (common random numbers).  A zero estimate
    is replaced by ``floor / samples`` to keep the value positive.
    """
    h = make_parameters(KAPPA_83).h

    def evaluate(x, alpha):
        f = f_alpha_mc_83(x, alpha, samples, seed, **mc_kwargs).value
        f = max(f, floor / samples)
        return f * math.exp(log_link_product(x, alpha, h))

    return PartitionProvider(evaluate, "monte-carlo-8/3")


def total_partition(provider: PartitionProvider, x) -> float:
    cfg = _as_config(x)
    return float(sum(provider(cfg, alpha) for alpha in enumerate_patterns(cfg.n)))


def c_j_decomposition(provider: PartitionProvider, x, j: int) -> float:
    """Sum of ``Z_alpha`` over patterns containing the link ``{2j+1, 2N}``."""
    cfg = _as_config(x)
    if not 0 <= j <= cfg.n - 1:
        raise BoundsError(f"j must lie in [0, {cfg.n - 1}]")
    link = (2 * j + 1, 2 * cfg.n)
    return float(sum(provider(cfg, alpha) for alpha in enumerate_patterns(cfg.n) if link in alpha.links))


def asymptotic_ratio_probe(provider: PartitionProvider, xi: float, u: Sequence[float],
                           x_tail: Sequence[float], k: int, collapse_scale: Sequence[float]) -> list[dict]:
    """Ratios ``Z^(N)(xi + eps u, x_tail) / Z^(k)(xi + eps u)`` for each ``eps``.

    The expected limit is ``Z^(N-k)(x_tail)``; rows carry it when the provider
    can evaluate it.  Diagnostic only.
    """
    if k < 1:
        raise BoundsError("k must be at least 1")
    u = sorted(float(v) for v in u)
    if len(u) != 2 * k:
        raise ValueError("need 2k collapsing offsets")
    x_tail = [float(v) for v in x_tail]
    n = k + len(x_tail) // 2
    limit = None
    if x_tail:
        try:
            limit = total_partition(provider, x_tail)
        except (BoundsError, ProviderError):
            limit = None
    rows = []
    for eps in collapse_scale:
        head = [xi + eps * v for v in u]
        if x_tail and head[-1] >= x_tail[0]:
            raise ValueError("collapsing points must stay left of the tail")
        num = total_partition(provider, head + x_tail)
        den = total_partition(provider, head)
        rows.append({"eps": float(eps), "N": n, "k": k, "ratio": num / den,
                     "limit": 1.0 if not x_tail else limit})
    return rows


def z_alpha_rectangle_83(ell: float, marks, alpha: LinkPattern, samples: int, seed: int, **mc_kwargs) -> Estimate:
    """``Z_alpha`` of ``[0, ell] x [0, 1]`` at ``kappa = 8/3`` for counterclockwise boundary marks.

    ``f_alpha`` is evaluated on the half-plane images of the marks and
    multiplied by the product of rectangle Poisson kernels to the power ``h``.
    """
    from .conformal import (RectangleMap, mobius_to_infinity, poisson_kernel_rectangle,
                            rectangle_boundary_parameter, rectangle_boundary_point)

    marks = [complex(m) for m in marks]
    s = [rectangle_boundary_parameter(ell, m) for m in marks]
    # pole halfway (counterclockwise) from the last mark back to the first
    gap = (s[0] - s[-1]) % 1.0
    pole = rectangle_boundary_point(ell, s[-1] + 0.5 * gap)
    rect = RectangleMap(ell)
    p_img = complex(rect(pole))
    imgs = np.asarray(rect(np.asarray(marks)), dtype=complex).real
    if np.isfinite(p_img.real) and abs(p_img) < 1e12:
        imgs = np.asarray(mobius_to_infinity(p_img.real)(imgs)).real
    est = f_alpha_mc_83(tuple(imgs), alpha, samples, seed, **mc_kwargs)
    h = make_parameters(KAPPA_83).h
    kernel = math.prod(poisson_kernel_rectangle(ell, marks[a - 1], marks[b - 1]) ** h for a, b in alpha.links)
    return Estimate(est.value * kernel, est.stderr * kernel, samples,
                    dict(est.meta, kernel_product=kernel, f_alpha=est.value, f_stderr=est.stderr))
