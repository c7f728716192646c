"""Complete elliptic integrals and Jacobi elliptic functions.

Real arguments use the arithmetic-geometric mean and the descending Landen
transformation; complex arguments go through the imaginary-argument addition
formulas.  All functions take the parameter ``m = k**2``.
"""

from __future__ import annotations

import numpy as np

_TOL = 1e-16
_MAX_ITER = 64


def agm(a: float, b: float) -> float:
    for _ in range(_MAX_ITER):
        if abs(a - b) <= _TOL * a:
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return 0.5 * (a + b)


def ellipk(m: float) -> float:
    """Complete elliptic integral of the first kind, ``K(m)``, for ``0 <= m < 1``."""
    if not 0.0 <= m < 1.0:
        raise ValueError(f"parameter m={m} outside [0, 1)")
    return np.pi / (2.0 * agm(1.0, np.sqrt(1.0 - m)))


def _theta_2_3_4(q: float):
    t2 = 0.0
    t3 = 1.0
    t4 = 1.0
    n = 0
    while True:
        a = q ** (n * (n + 1))
        t2 += a
        if n >= 1:
            b = q ** (n * n)
            t3 += 2.0 * b
            t4 += 2.0 * b * (-1) ** n
        else:
            b = 1.0
        if a < 1e-18 and (n == 0 or b < 1e-18):
            break
        n += 1
    return 2.0 * q ** 0.25 * t2, t3, t4


def parameter_from_ratio(ratio: float) -> float:
    """Return ``m`` such that ``K(1-m) / K(m) == ratio``.

    Uses the nome ``q = exp(-pi * ratio)`` and theta-function quotients; the
    complementary nome is used when it converges faster.
    """
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    if ratio >= 1.0:
        t2, t3, t4 = _theta_2_3_4(np.exp(-np.pi * ratio))
        return (t2 / t3) ** 4
    t2, t3, t4 = _theta_2_3_4(np.exp(-np.pi / ratio))
    # roles of k and k' swap under ratio -> 1/ratio
    return (t4 / t3) ** 4


def ellipj(u, m: float):
    """Jacobi ``sn, cn, dn`` for real ``u`` (array-like) and ``0 <= m < 1``."""
    u = np.asarray(u, dtype=float)
    if not 0.0 <= m < 1.0:
        raise ValueError(f"parameter m={m} outside [0, 1)")
    if m < 1e-300:
        s, c = np.sin(u), np.cos(u)
        return s, c, np.ones_like(u)
    a = [1.0]
    c = [np.sqrt(m)]
    b = np.sqrt(1.0 - m)
    while abs(c[-1]) > 1e-17 and len(a) < _MAX_ITER:
        an = 0.5 * (a[-1] + b)
        cn = 0.5 * (a[-1] - b)
        b = np.sqrt(a[-1] * b)
        a.append(an)
        c.append(cn)
    n = len(a) - 1
    phi = (2.0 ** n) * a[n] * u
    for i in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[i] / a[i] * np.sin(phi)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = np.sqrt(1.0 - m * sn * sn)
    return sn, cn, dn


def ellipj_complex(z, m: float):
    """Jacobi ``sn, cn, dn`` at complex ``z`` via the imaginary-argument formulas."""
    z = np.asarray(z, dtype=complex)
    s, c, d = ellipj(z.real, m)
    s1, c1, d1 = ellipj(z.imag, 1.0 - m)
    den = c1 * c1 + m * s * s * s1 * s1
    with np.errstate(divide="ignore", invalid="ignore"):
        sn = (s * d1 + 1j * c * d * s1 * c1) / den
        cn = (c * c1 - 1j * s * d * s1 * d1) / den
        dn = (d * c1 * d1 - 1j * m * s * c * s1) / den
    return sn, cn, dn
