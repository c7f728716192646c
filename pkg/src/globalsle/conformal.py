"""SLE parameters, boundary Poisson kernels and closed-form uniformizing maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .elliptic import ellipj_complex, ellipk, parameter_from_ratio
from .errors import BoundsError, DomainError, NonSmoothBoundaryError, SingularityError

_BOUNDARY_TOL = 1e-9
_CORNER_TOL = 1e-12


@dataclass(frozen=True)
class Parameters:
    """The triple ``(kappa, h, c)``; build with :func:`make_parameters`."""

    kappa: float
    h: float
    c: float


def make_parameters(kappa: float) -> Parameters:
    kappa = float(kappa)
    if not 0.0 < kappa < 8.0 or not np.isfinite(kappa):
        raise BoundsError(f"kappa must lie in (0, 8), got {kappa}")
    h = (6.0 - kappa) / (2.0 * kappa)
    c = (3.0 * kappa - 8.0) * (6.0 - kappa) / (2.0 * kappa)
    return Parameters(kappa, h, c)


def kappa_from_q(q: float) -> float:
    """SLE parameter associated with cluster weight ``q`` in ``[0, 4]``."""
    return 4.0 * np.pi / np.arccos(-np.sqrt(q) / 2.0)


# ----------------------------------------------------------------------------
# Half-plane kernel and Moebius automorphisms


def poisson_kernel_halfplane(x: float, y: float) -> float:
    """Boundary Poisson kernel of the upper half-plane without the ``1/pi``."""
    d = float(y) - float(x)
    if d == 0.0:
        raise SingularityError("Poisson kernel is singular at x == y")
    return 1.0 / (d * d)


@dataclass(frozen=True)
class Mobius:
    """Real Moebius map ``z -> (a z + b) / (c z + d)`` with ``ad - bc > 0``."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if self.a * self.d - self.b * self.c <= 0:
            raise ValueError("determinant must be positive to preserve the half-plane")

    def __call__(self, z):
        z = np.asarray(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.a * z + self.b) / (self.c * z + self.d)

    def derivative(self, z):
        det = self.a * self.d - self.b * self.c
        return det / (self.c * np.asarray(z) + self.d) ** 2

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "Mobius") -> "Mobius":
        """``self o other``."""
        return Mobius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )


def mobius_zero_infinity(start: float, end: float) -> Mobius:
    """Automorphism of the half-plane sending ``start -> 0`` and ``end -> inf``."""
    if start == end:
        raise SingularityError("start and end coincide")
    # z -> s (z - start) / (end - z), with s = sign(end - start)
    s = 1.0 if end > start else -1.0
    return Mobius(s, -s * start, -1.0, end)


def mobius_to_infinity(p: float) -> Mobius:
    """Automorphism sending the real point ``p`` to infinity (``z -> -1/(z-p)``)."""
    return Mobius(0.0, -1.0, 1.0, -p)


def mobius_between(a: float, b: float, scale: float = 1.0) -> Mobius:
    """Automorphism with ``0 -> a`` and ``inf -> b``."""
    if a == b:
        raise SingularityError("a and b coincide")
    # z -> (b z + a c) / (z + c); determinant c (b - a) must be positive
    c = abs(scale) if b > a else -abs(scale)
    return Mobius(b, a * c, 1.0, c)


# ----------------------------------------------------------------------------
# Rectangle [0, ell] x [0, 1]


@dataclass(frozen=True)
class RectangleMap:
    """Conformal map of ``[0, ell] x [0, 1]`` onto the upper half-plane.

    ``z -> sn(2K (z - ell/2) / ell | m)`` with ``m`` chosen so that
    ``K(1 - m) / K(m) = 2 / ell``.  The bottom side goes to ``[-1, 1]`` with
    its midpoint at ``0``; the midpoint of the top side goes to infinity.
    """

    ell: float
    m: float = field(init=False)
    K: float = field(init=False)

    def __post_init__(self):
        if not self.ell > 0:
            raise BoundsError("rectangle width must be positive")
        m = parameter_from_ratio(2.0 / self.ell)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "K", ellipk(m))

    @property
    def scale(self) -> float:
        return 2.0 * self.K / self.ell

    def _u(self, z):
        return (np.asarray(z, dtype=complex) - 0.5 * self.ell) * self.scale

    def __call__(self, z):
        return map_rect_to_halfplane(self.ell, z, _rect=self)

    def derivative(self, z):
        _check_in_rectangle(self.ell, z)
        _, cn, dn = ellipj_complex(self._u(z), self.m)
        return cn * dn * self.scale

    def corners(self):
        return np.array([0.0, self.ell, self.ell + 1j, 1j])


def _check_in_rectangle(ell, z):
    z = np.asarray(z, dtype=complex)
    bad = (z.real < -_BOUNDARY_TOL) | (z.real > ell + _BOUNDARY_TOL) | \
          (z.imag < -_BOUNDARY_TOL) | (z.imag > 1 + _BOUNDARY_TOL)
    if np.any(bad):
        raise DomainError(f"points outside [0,{ell}]x[0,1]")


def map_rect_to_halfplane(ell: float, z, _rect: RectangleMap | None = None):
    """Image of ``z`` (scalar or array) under the canonical rectangle map."""
    rect = _rect if _rect is not None else RectangleMap(ell)
    _check_in_rectangle(rect.ell, z)
    sn, _, _ = ellipj_complex(rect._u(z), rect.m)
    sn = np.asarray(sn)
    # boundary points are real up to rounding
    z_arr = np.asarray(z, dtype=complex)
    on_boundary = (np.abs(z_arr.imag) < _BOUNDARY_TOL) | (np.abs(z_arr.imag - 1) < _BOUNDARY_TOL) | \
                  (np.abs(z_arr.real) < _BOUNDARY_TOL) | (np.abs(z_arr.real - rect.ell) < _BOUNDARY_TOL)
    # the pole comes out as a huge value from a vanishing denominator
    pole = ~np.isfinite(sn) | (np.abs(sn) > 1e14)
    sn = np.where(on_boundary & ~pole, sn.real + 0j, sn)
    sn = np.where(pole, complex(np.inf, 0.0), sn)
    return sn if sn.ndim else complex(sn)


def rectangle_boundary_point(ell: float, s: float) -> complex:
    """Point at counterclockwise arclength fraction ``s`` in ``[0, 1)`` from the corner 0."""
    perimeter = 2 * ell + 2
    t = (s % 1.0) * perimeter
    if t <= ell:
        return complex(t, 0)
    t -= ell
    if t <= 1:
        return complex(ell, t)
    t -= 1
    if t <= ell:
        return complex(ell - t, 1)
    t -= ell
    return complex(0, 1 - t)


def rectangle_boundary_parameter(ell: float, z: complex) -> float:
    """Inverse of :func:`rectangle_boundary_point`."""
    x, y = z.real, z.imag
    perimeter = 2 * ell + 2
    tol = _BOUNDARY_TOL
    if abs(y) < tol and -tol <= x < ell + tol and not abs(x - ell) < tol:
        t = x
    elif abs(x - ell) < tol and -tol <= y <= 1 + tol and not abs(y - 1) < tol:
        t = ell + y
    elif abs(y - 1) < tol and -tol <= x <= ell + tol and not abs(x) < tol:
        t = ell + 1 + (ell - x)
    elif abs(x) < tol and -tol <= y <= 1 + tol:
        t = 2 * ell + 1 + (1 - y)
    else:
        raise DomainError(f"{z} is not on the boundary of the rectangle")
    return (max(t, 0.0) % perimeter) / perimeter


# ----------------------------------------------------------------------------
# Unit disc


@dataclass(frozen=True)
class DiscMap:
    """Cayley-type map ``z -> i (1 + r z) / (1 - r z)`` with ``|r| = 1``."""

    rotation: complex = 1.0 + 0j

    def __call__(self, z):
        w = self.rotation * np.asarray(z, dtype=complex)
        return 1j * (1 + w) / (1 - w)

    def derivative(self, z):
        w = self.rotation * np.asarray(z, dtype=complex)
        return 2j * self.rotation / (1 - w) ** 2


def _disc_map_avoiding(points) -> DiscMap:
    # rotation r such that r * z = 1 happens at the point opposite the mean direction
    pts = np.asarray(points, dtype=complex)
    mean = pts.mean()
    if abs(mean) < 1e-6:
        mean = 1j * pts[0]
    pole = -mean / abs(mean)
    return DiscMap(rotation=1.0 / pole)


# ----------------------------------------------------------------------------
# Domains


@dataclass(frozen=True)
class DomainSpec:
    """A simply connected domain with counterclockwise marked boundary points.

    ``kind`` is ``"half-plane"``, ``"unit-disc"`` or ``"rectangle"``
    (``[0, ell] x [0, 1]``).
    """

    kind: str
    marked_points: tuple = ()
    ell: float = 1.0

    def __post_init__(self):
        if self.kind not in ("half-plane", "unit-disc", "rectangle"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        pts = tuple(complex(p) for p in self.marked_points)
        object.__setattr__(self, "marked_points", pts)
        params = [self.boundary_parameter(p) for p in pts]
        if len(params) > 1:
            descents = sum(params[i + 1] <= params[i] for i in range(len(params) - 1))
            wrap = params[0] <= params[-1]
            if descents + (not wrap) > 1 or len(set(params)) != len(params):
                raise DomainError("marked points are not strictly counterclockwise")
            if self.kind == "half-plane" and descents:
                raise DomainError("half-plane marked points must be increasing")

    def on_boundary(self, z) -> bool:
        try:
            self.boundary_parameter(z)
        except DomainError:
            return False
        return True

    def boundary_parameter(self, z) -> float:
        z = complex(z)
        if self.kind == "half-plane":
            if abs(z.imag) > _BOUNDARY_TOL:
                raise DomainError(f"{z} is not on the real line")
            return z.real
        if self.kind == "unit-disc":
            if abs(abs(z) - 1) > _BOUNDARY_TOL:
                raise DomainError(f"{z} is not on the unit circle")
            return (np.angle(z) / (2 * np.pi)) % 1.0
        return rectangle_boundary_parameter(self.ell, z)

    def uniformizer(self, avoid=()):
        """Canonical map onto the half-plane, with ``.derivative``."""
        if self.kind == "half-plane":
            return Mobius(1.0, 0.0, 0.0, 1.0)
        if self.kind == "unit-disc":
            return _disc_map_avoiding(avoid if len(avoid) else [1.0])
        return RectangleMap(self.ell)

    def to_halfplane(self, points=None) -> np.ndarray:
        pts = np.asarray(self.marked_points if points is None else points, dtype=complex)
        phi = self.uniformizer(avoid=pts)
        return np.asarray(phi(pts))


def _is_rectangle_corner(ell, z) -> bool:
    return any(abs(z - c) < _CORNER_TOL for c in (0, ell, ell + 1j, 1j))


def poisson_kernel(domain: DomainSpec, x, y, phi=None) -> float:
    """``H_domain(x, y) = |phi'(x)| |phi'(y)| H_H(phi(x), phi(y))``.

    ``phi`` defaults to the domain's canonical uniformizer; any conformal map
    onto the half-plane with a ``derivative`` method gives the same value.
    """
    x, y = complex(x), complex(y)
    domain.boundary_parameter(x)
    domain.boundary_parameter(y)
    if x == y:
        raise SingularityError("Poisson kernel is singular at x == y")
    if domain.kind == "rectangle" and (_is_rectangle_corner(domain.ell, x) or _is_rectangle_corner(domain.ell, y)):
        raise NonSmoothBoundaryError("rectangle corners are not smooth boundary points")
    if phi is None:
        phi = domain.uniformizer(avoid=[x, y])
    fx, fy = complex(phi(x)), complex(phi(y))
    if not (np.isfinite(fx) and np.isfinite(fy)):
        raise SingularityError("a boundary point is mapped to infinity; choose another map")
    dx, dy = abs(complex(phi.derivative(x))), abs(complex(phi.derivative(y)))
    return dx * dy * poisson_kernel_halfplane(fx.real, fy.real)


def poisson_kernel_rectangle(ell: float, x, y, offset: float = 0.0) -> float:
    """Kernel of ``[offset, offset + ell] x [0, 1]``."""
    dom = DomainSpec("rectangle", ell=ell)
    return poisson_kernel(dom, complex(x) - offset, complex(y) - offset)

