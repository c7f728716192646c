"""Multiple SLE dynamics in the half-plane.

States are stored in half-plane coordinates: marks are increasing reals and
curves are polylines in the closed upper half-plane.  Resampling a curve maps
the component containing its endpoints to the half-plane by a Mobius map
followed by unzipping every other curve, samples a chordal SLE there and
pulls it back.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .combinatorics import LinkPattern, pattern_of_matching
from .conformal import Mobius, Parameters, RectangleMap, make_parameters, mobius_to_infinity, rectangle_boundary_point
from .errors import BoundsError, DegenerateSegmentError, DomainError, GeometryError, NumericalBlowupError, \
    StatisticsError, SwallowedError
from .geometry import polylines_touch, signed_area_to_chord
from .loewner import Curve, DrivingFunction, curve_from_driver, extract_driver, pull_back, push_forward, \
    read_curve, sample_sle_between, write_curve
from .partition import BoundaryConfig, PartitionProvider

DEFAULT_GUARD = 0.5


def n_kappa(kappa: float) -> int:
    """``ceil(kappa / (8 - kappa)) + 1`` for ``kappa`` in ``(4, 8)``."""
    if not 4.0 < kappa < 8.0:
        raise BoundsError("n_kappa is defined for kappa in (4, 8)")
    # guard against ratios a rounding error above an integer
    r = kappa / (8.0 - kappa)
    return int(math.ceil(r - 1e-12)) + 1


# ----------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class MultiCurveState:
    params: Parameters
    pattern: LinkPattern
    marks: tuple
    curves: tuple
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        marks = tuple(float(m) for m in self.marks)
        if len(marks) != 2 * self.pattern.n_links:
            raise ValueError("need 2N marks for the pattern")
        if any(b <= a for a, b in zip(marks, marks[1:])):
            raise ValueError("marks must be strictly increasing")
        if len(self.curves) != self.pattern.n_links:
            raise ValueError("need one curve per link")
        object.__setattr__(self, "marks", marks)
        object.__setattr__(self, "curves", tuple(self.curves))

    @property
    def n(self) -> int:
        return self.pattern.n_links

    def endpoints(self, j: int) -> tuple:
        a, b = self.pattern.links[j]
        return self.marks[a - 1], self.marks[b - 1]

    def is_disjoint(self, guard: float = DEFAULT_GUARD) -> bool:
        for i in range(self.n):
            for k in range(i + 1, self.n):
                if polylines_touch(self.curves[i].points, self.curves[k].points, guard):
                    return False
        return True


def straight_state(params: Parameters, pattern: LinkPattern, marks, n_points: int = 64) -> MultiCurveState:
    """Semicircular arcs between the paired marks (disjoint for a planar pattern)."""
    if len(marks) != 2 * pattern.n_links:
        raise ValueError("need 2N marks for the pattern")
    curves = []
    for a, b in pattern.links:
        x, y = marks[a - 1], marks[b - 1]
        theta = np.linspace(np.pi, 0.0, n_points)
        c, r = 0.5 * (x + y), 0.5 * (y - x)
        pts = c + r * np.exp(1j * theta)
        pts[0], pts[-1] = x, y
        curves.append(Curve(pts))
    return MultiCurveState(params, pattern, tuple(marks), tuple(curves))


@dataclass(frozen=True)
class RectangleChart:
    """Map of ``[0, ell] x [0, 1]`` onto the half-plane sending the boundary point ``pole`` to infinity.

    ``pole`` is a counterclockwise perimeter fraction.
    """

    ell: float
    pole: float = 0.0

    def _maps(self):
        rect = RectangleMap(self.ell)
        zp = rectangle_boundary_point(self.ell, self.pole)
        p_img = complex(rect(zp))
        if not np.isfinite(p_img.real) or abs(p_img) > 1e12:
            return rect, Mobius(1.0, 0.0, 0.0, 1.0)
        return rect, mobius_to_infinity(p_img.real)

    def __call__(self, z):
        rect, mob = self._maps()
        w = np.asarray(rect(z), dtype=complex)
        out = np.asarray(mob(w), dtype=complex)
        # clip rounding below the real line
        return out.real + 1j * np.maximum(out.imag, 0.0)

    def boundary_image(self, s) -> np.ndarray:
        pts = np.array([rectangle_boundary_point(self.ell, v) for v in np.atleast_1d(s)])
        return np.asarray(self(pts)).real


def state_from_rectangle(params: Parameters, ell: float, pole: float, mark_fractions, pattern: LinkPattern,
                         curves_rect) -> MultiCurveState:
    """State from curves drawn in the rectangle; marks are given as perimeter fractions.

    Marks are relabelled in increasing order of their half-plane images; the
    pattern and the curve list are relabelled to match.
    """
    chart = RectangleChart(ell, pole)
    images = chart.boundary_image(mark_fractions)
    order = np.argsort(images)
    relabel = {int(old) + 1: new + 1 for new, old in enumerate(order)}
    new_pattern = pattern_of_matching([(relabel[a], relabel[b]) for a, b in pattern.links])
    marks = images[order]
    curves = []
    for a, b in new_pattern.links:
        # find the source curve joining the same two marks
        for (oa, ob), pts in zip(pattern.links, curves_rect):
            if {relabel[oa], relabel[ob]} == {a, b}:
                img = np.asarray(chart(np.asarray(pts, dtype=complex)), dtype=complex)
                if relabel[oa] != a:
                    img = img[::-1]
                img[0], img[-1] = marks[a - 1], marks[b - 1]
                curves.append(Curve(img))
                break
    return MultiCurveState(params, new_pattern, tuple(marks), tuple(curves), {"ell": ell, "pole": pole})


# ----------------------------------------------------------------------------
# resampling


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _pole_for(state: MultiCurveState, j: int) -> float:
    """A real point on the boundary of the component of link ``j``, next to its first mark."""
    a, _ = state.pattern.links[j]
    x = state.marks
    if a == 1:
        return x[0] - max(1.0, x[-1] - x[0])
    return 0.5 * (x[a - 2] + x[a - 1])


def uniformize_component(state: MultiCurveState, j: int):
    """Maps sending the component of link ``j`` onto the half-plane.

    Returns the Mobius map, the drivers of the successive unzippings and the
    images of the two endpoints of link ``j``.
    """
    mob = mobius_to_infinity(_pole_for(state, j))
    a, b = state.endpoints(j)
    targets = np.asarray(mob(np.array([a, b], dtype=complex)), dtype=complex)
    others = [np.asarray(mob(state.curves[i].points), dtype=complex) for i in range(state.n) if i != j]
    drivers = []
    for k in range(len(others)):
        pts = others[k]
        pts[0] = pts[0].real
        pts[-1] = pts[-1].real
        rest = others[k + 1:]
        extra = np.concatenate([targets] + rest) if rest else targets
        try:
            driver, images = extract_driver(Curve(pts), extra=extra, return_images=True)
        except (DomainError, DegenerateSegmentError) as exc:
            raise GeometryError(f"could not unzip curve {k}: {exc}") from exc
        drivers.append(driver)
        targets = images[:2]
        off = 2
        for r in range(len(rest)):
            others[k + 1 + r] = images[off:off + len(rest[r])]
            off += len(rest[r])
    if np.any(np.abs(targets.imag) > 1e-6 * max(1.0, float(np.abs(targets).max()))):
        raise GeometryError("target endpoints left the real line")
    ta, tb = float(targets[0].real), float(targets[1].real)
    if not abs(tb - ta) > 1e-12:
        raise GeometryError("target endpoints collapsed while unzipping")
    return mob, drivers, ta, tb


def _densify(sample, pts, to_state, max_seg, max_split=64):
    """Subdivide, in sampling coordinates, the steps whose images are longer than ``max_seg``.

    The pull-back can stretch a short step into a long chord; its image is
    replaced by the image of the subdivided straight step.
    """
    seg = np.abs(np.diff(pts))
    long = np.flatnonzero(seg > max_seg)
    if len(long) == 0:
        return pts
    pieces = [pts[:long[0] + 1]]
    for n, k in enumerate(long):
        m = min(int(np.ceil(seg[k] / max_seg)), max_split)
        inner = sample[k] + (sample[k + 1] - sample[k]) * np.arange(1, m) / m
        pieces.append(to_state(inner))
        stop = long[n + 1] + 1 if n + 1 < len(long) else len(pts)
        pieces.append(pts[k + 1:stop])
    return np.concatenate(pieces)


def resample_step(state: MultiCurveState, j: int, seed, retries: int = 20, guard: float = DEFAULT_GUARD,
                  resolution: float = 1e-2, eps: float = 0.02) -> MultiCurveState:
    """Redraw curve ``j`` from chordal SLE in its component; the other curves are kept as they are."""
    if state.params.kappa > 4.0:
        raise BoundsError("resampling is implemented for kappa <= 4")
    if not 0 <= j < state.n:
        raise IndexError(f"curve index {j} out of range")
    rng = _rng(seed)
    mob, drivers, ta, tb = uniformize_component(state, j)
    inv = mob.inverse()
    a, b = state.endpoints(j)

    def to_state(z):
        for driver in reversed(drivers):
            z = pull_back(driver, z)
        return np.asarray(inv(z), dtype=complex)

    max_seg = 4.0 * eps * abs(b - a)
    for attempt in range(retries):
        sample = np.asarray(sample_sle_between(state.params, ta, tb, rng, resolution, eps).points, dtype=complex)
        pts = to_state(sample)
        pts[0], pts[-1] = a, b
        pts = _densify(sample, pts, to_state, max_seg)
        if not np.all(np.isfinite(pts)):
            continue
        pts = pts.real + 1j * np.maximum(pts.imag, 0.0)
        new = Curve(pts, {"kappa": state.params.kappa, "attempts": attempt + 1})
        if all(not polylines_touch(new.points, state.curves[i].points, guard)
               for i in range(state.n) if i != j):
            curves = list(state.curves)
            curves[j] = new
            return replace(state, curves=tuple(curves))
    raise GeometryError(f"resampled curve {j} kept touching the others after {retries} attempts")


def run_resampling_chain(initial: MultiCurveState, steps: int, seed, stride: int = 1, indices=None,
                         **step_kwargs) -> list[MultiCurveState]:
    """States at steps ``0, stride, 2 stride, ...``; each step resamples a uniform index."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    rng = _rng(seed)
    pool = list(range(initial.n)) if indices is None else list(indices)
    traj = [initial]
    state = initial
    for s in range(1, steps + 1):
        j = pool[int(rng.integers(len(pool)))]
        state = resample_step(state, j, rng, **step_kwargs)
        if s % stride == 0:
            traj.append(state)
    return traj


def signed_area_statistic(state: MultiCurveState, j: int | None = None) -> float:
    """Signed area between a curve and its chord (all curves summed when ``j`` is None)."""
    idx = range(state.n) if j is None else [j]
    return float(sum(signed_area_to_chord(state.curves[i].points) for i in idx))


def save_trajectory(traj, directory, seed, stride: int = 1) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = []
    for s, state in enumerate(traj):
        for j, c in enumerate(state.curves):
            name = f"step{s * stride:06d}_curve{j}.txt"
            write_curve(d / name, c)
            files.append(name)
    first = traj[0]
    manifest = {"seed": seed, "kappa": first.params.kappa, "pattern": first.pattern.encode(),
                "marks": list(first.marks), "stride": stride, "n_states": len(traj), "files": files}
    path = d / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return path


def load_trajectory(directory) -> list[MultiCurveState]:
    d = Path(directory)
    man = json.loads((d / "manifest.json").read_text())
    params = make_parameters(man["kappa"])
    pattern = LinkPattern.parse(man["pattern"])
    stride = man["stride"]
    out = []
    for s in range(man["n_states"]):
        curves = [read_curve(d / f"step{s * stride:06d}_curve{j}.txt") for j in range(pattern.n_links)]
        out.append(MultiCurveState(params, pattern, tuple(man["marks"]), tuple(curves)))
    return out


# ----------------------------------------------------------------------------
# drifted Loewner chain


def _fd_step(W: float, V: np.ndarray) -> float:
    gap = float(np.min(np.abs(V - W)))
    return max(1e-4 * gap, 1e-10)


def drift(params: Parameters, provider: PartitionProvider, alpha: LinkPattern, j: int, W: float,
          V: np.ndarray) -> float:
    """``kappa * d/dx_j log Z_alpha`` by central differences; ``V`` holds the other marks in order."""
    h = _fd_step(W, V)
    pts_p = np.insert(V, j - 1, W + h)
    pts_m = np.insert(V, j - 1, W - h)
    zp = provider(BoundaryConfig(tuple(pts_p)), alpha)
    zm = provider(BoundaryConfig(tuple(pts_m)), alpha)
    return params.kappa * (math.log(zp) - math.log(zm)) / (2.0 * h)


def sample_drifted_chain(params: Parameters, x, alpha: LinkPattern, j: int, provider: PartitionProvider,
                         dt: float, seed, max_steps: int = 2_000_000, stop_fraction: float = 1e-6,
                         return_trace: bool = False):
    """Euler-Maruyama run of the Loewner chain growing from ``x_j`` towards its partner."""
    cfg = x if isinstance(x, BoundaryConfig) else BoundaryConfig(tuple(x))
    if cfg.n != alpha.n_links:
        raise ValueError("pattern size does not match the number of points")
    if not 1 <= j <= 2 * cfg.n:
        raise IndexError("j out of range")
    if not dt > 0:
        raise ValueError("dt must be positive")
    k = alpha.partner(j)
    rng = _rng(seed)
    pts = np.asarray(cfg.points)
    W = float(pts[j - 1])
    V = np.delete(pts, j - 1).astype(float)
    kk = k - 2 if k > j else k - 1  # index of the target inside V
    stop = stop_fraction * abs(pts[k - 1] - pts[j - 1])
    sqrt_k = math.sqrt(params.kappa)
    times, values, drifts = [0.0], [W], []
    t = 0.0
    for _ in range(max_steps):
        gap_target = abs(V[kk] - W)
        if gap_target < stop:
            break
        gap = float(np.min(np.abs(V - W)))
        # keep the capacity clock resolvable in double precision
        step = max(min(dt, 0.01 * gap * gap), 1e-13 * (1.0 + t))
        b = drift(params, provider, alpha, j, W, V)
        drifts.append(b)
        # slit flow of the marks with the driver frozen over the step
        d = V - W
        V = W + np.sign(d) * np.sqrt(d * d + 4.0 * step)
        W = W + b * step + sqrt_k * math.sqrt(step) * rng.standard_normal()
        t += step
        times.append(t)
        values.append(W)
        side = np.sign(V - W)
        if np.any(side != np.sign(d)):
            crossed = np.flatnonzero(side != np.sign(d))
            if np.all(crossed == kk):
                break
            raise NumericalBlowupError("driver crossed a marked point before the target; reduce dt")
    else:
        raise NumericalBlowupError("target not reached within max_steps")
    values = np.asarray(values)
    values = np.append(values[:-1], values[-2]) if len(values) > 1 else values
    driver = DrivingFunction(np.asarray(times), values)
    stride = max(1, len(times) // 4000)
    curve = curve_from_driver(driver, stride)
    curve.meta.update(kappa=params.kappa, capacity=t, target=float(pts[k - 1]))
    if return_trace:
        return curve, {"driver": driver, "drift": np.asarray(drifts), "W": np.asarray(values), "times": np.asarray(times)}
    return curve


# ----------------------------------------------------------------------------
# cascade


@dataclass
class CascadeReport:
    link: tuple
    statistic: float
    pvalue: float
    passed: bool
    n_conditional: int
    n_direct: int

    def row(self) -> dict:
        return {"link": list(self.link), "ks": self.statistic, "pvalue": self.pvalue, "pass": self.passed,
                "n_conditional": self.n_conditional, "n_direct": self.n_direct}


def cascade_check(state: MultiCurveState, j: int, samples: int, seed, level: float = 0.01,
                  min_samples: int = 20, **step_kwargs) -> CascadeReport:
    """Conditional law of the other curves given the curve on ``{j, j+1}`` against a chain run in its slit domain.

    The conditional ensemble resamples only the other curves of ``state``.  The
    direct ensemble unzips the fixed curve, runs an ``N - 1`` curve chain in
    the half-plane and pulls the results back.  The summary statistic is the
    total signed area of the other curves.
    """
    from .harness.stats import ks_two_sample

    link = (j, j + 1)
    if link not in state.pattern:
        raise ValueError(f"pattern {state.pattern} has no link {link}")
    if state.n == 1:
        return CascadeReport(link, 0.0, 1.0, True, 0, 0)
    if samples < min_samples:
        raise StatisticsError(f"need at least {min_samples} samples")
    rng = _rng(seed)
    fixed = state.pattern.links.index(link)
    others = [i for i in range(state.n) if i != fixed]

    def stat(curves):
        return sum(signed_area_to_chord(c.points) for c in curves)

    cond = []
    s = state
    for _ in range(samples):
        for i in others:
            s = resample_step(s, i, rng, **step_kwargs)
        cond.append(stat([s.curves[i] for i in others]))

    # slit domain: unzip the fixed curve, relabel the remaining marks
    fixed_curve = np.asarray(state.curves[fixed].points, dtype=complex)
    rest_marks = [m for i, m in enumerate(state.marks, start=1) if i not in link]
    mob = mobius_to_infinity(_outside_point(state, link))
    img = np.asarray(mob(fixed_curve), dtype=complex)
    img[0], img[-1] = img[0].real, img[-1].real
    driver = extract_driver(Curve(img))
    sub_marks = np.asarray(push_forward(driver, np.asarray(mob(np.asarray(rest_marks, dtype=complex))))).real
    order = np.argsort(sub_marks)
    old_labels = [i for i in range(1, 2 * state.n + 1) if i not in link]
    relabel = {old_labels[o]: new + 1 for new, o in enumerate(order)}
    sub_links = [(relabel[a], relabel[b]) for a, b in (state.pattern.links[i] for i in others)]
    sub_pattern = pattern_of_matching(sub_links)
    sub_curves = []
    for a, b in sub_pattern.links:
        for i in others:
            oa, ob = state.pattern.links[i]
            if {relabel[oa], relabel[ob]} == {a, b}:
                pts = np.asarray(push_forward(driver, np.asarray(mob(state.curves[i].points))), dtype=complex)
                if relabel[oa] != a:
                    pts = pts[::-1]
                pts[0], pts[-1] = sub_marks[order][a - 1], sub_marks[order][b - 1]
                sub_curves.append(Curve(pts.real + 1j * np.maximum(pts.imag, 0.0)))
    sub = MultiCurveState(state.params, sub_pattern, tuple(sub_marks[order]), tuple(sub_curves))
    inv = mob.inverse()
    direct = []
    for _ in range(samples):
        for i in range(sub.n):
            sub = resample_step(sub, i, rng, **step_kwargs)
        back = []
        for c in sub.curves:
            pts = np.asarray(inv(pull_back(driver, c.points)), dtype=complex)
            back.append(Curve(pts.real + 1j * np.maximum(pts.imag, 0.0)))
        direct.append(stat(back))
    res = ks_two_sample(np.asarray(cond), np.asarray(direct), level=level)
    return CascadeReport(link, res.statistic, res.pvalue, res.passed, len(cond), len(direct))


def _outside_point(state: MultiCurveState, link) -> float:
    # a real point not enclosed by the fixed curve: left of its first mark
    a = link[0]
    x = state.marks
    if a == 1:
        return x[0] - max(1.0, x[-1] - x[0])
    return 0.5 * (x[a - 2] + x[a - 1])
