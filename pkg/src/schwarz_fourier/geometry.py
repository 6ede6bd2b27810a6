"""Two-disc geometry.

``B1`` is always the unit disc centred at the origin, ``B2`` the disc of radius
``R`` centred at ``(m, 0)``.  A scenario is parameterized either by ``(m, R)`` or
by the angles ``(theta1_star, theta2_star)`` that the upper intersection point
makes with the positive x-axis, measured at the centre of ``B1`` and ``B2``
respectively.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
_SLACK = 1e-12


class GeometryError(ValueError):
    """Raised for angles or disc parameters outside the admissible range."""


class InfeasibleSnapError(GeometryError):
    """No grid scenario satisfies the snapping constraints."""


@dataclass(frozen=True)
class DiscPair:
    theta1_star: float
    theta2_star: float
    m: float
    R: float

    @property
    def degenerate(self) -> bool:
        """True when the two discs coincide (``theta1_star == theta2_star``)."""
        return abs(self.theta2_star - self.theta1_star) <= _SLACK

    @property
    def z1(self) -> tuple[float, float]:
        return (math.cos(self.theta1_star), math.sin(self.theta1_star))

    @property
    def z2(self) -> tuple[float, float]:
        return (math.cos(self.theta1_star), -math.sin(self.theta1_star))

    @property
    def gamma1(self) -> tuple[float, float]:
        """Interface arc on dB1 as an angle interval in B1-polar coordinates."""
        return (-self.theta1_star, self.theta1_star)

    @property
    def gamma2(self) -> tuple[float, float]:
        """Interface arc on dB2 as an angle interval in B2-polar coordinates."""
        return (self.theta2_star, TWO_PI - self.theta2_star)

    def intersection_mismatch(self) -> float:
        """Distance between z1 computed from each disc's polar angle."""
        x1, y1 = self.z1
        x2 = self.m + self.R * math.cos(self.theta2_star)
        y2 = self.R * math.sin(self.theta2_star)
        return math.hypot(x1 - x2, y1 - y2)


@dataclass(frozen=True)
class GridConfig:
    n1: int
    n2: int

    def __post_init__(self):
        for name, n in (("n1", self.n1), ("n2", self.n2)):
            if int(n) != n or n < 6 or n % 2:
                raise GeometryError(f"{name} must be an even integer >= 6, got {n}")


@dataclass(frozen=True)
class SnappedScenario:
    base: DiscPair
    grid: GridConfig
    theta1_int: float
    theta2_int: float
    ell1: int
    ell2: int
    pair: DiscPair

    @property
    def n1(self) -> int:
        return self.grid.n1

    @property
    def n2(self) -> int:
        return self.grid.n2


def _check_angles(theta1, theta2):
    if not (0.0 < theta1 and theta1 <= theta2 + _SLACK and theta2 < math.pi):
        raise GeometryError(
            f"angles must satisfy 0 < theta1 <= theta2 < pi, got ({theta1}, {theta2})"
        )


def discs_from_angles(theta1: float, theta2: float) -> DiscPair:
    """Disc pair with intersection angles ``(theta1, theta2)``."""
    theta1 = float(theta1)
    theta2 = float(theta2)
    _check_angles(theta1, theta2)
    R = math.sin(theta1) / math.sin(theta2)
    if theta2 == math.pi / 2:
        m = math.cos(theta1)
    else:
        m = math.cos(theta1) - math.sin(theta1) / math.tan(theta2)
    return DiscPair(theta1, theta2, m, R)


def overlap_violation(m: float, R: float) -> str | None:
    """Name of the violated proper-overlap condition, or None."""
    if R <= 0:
        return "radius must be positive"
    if m - R >= 1.0:
        return "discs disjoint (m - R >= 1)"
    if m + R <= 1.0:
        return "B2 inside B1 (m + R <= 1)"
    if m - R <= -1.0:
        return "B1 inside B2 (m - R <= -1)"
    return None


def angles_from_discs(m: float, R: float) -> tuple[float, float]:
    """Inverse of :func:`discs_from_angles` via the cosine rule."""
    msg = overlap_violation(m, R)
    if msg is not None:
        raise GeometryError(msg)
    c1 = (1.0 + m * m - R * R) / (2.0 * m)
    c2 = (R * R + m * m - 1.0) / (2.0 * R * m)
    theta1 = math.acos(min(1.0, max(-1.0, c1)))
    theta2 = math.pi - math.acos(min(1.0, max(-1.0, c2)))
    return theta1, theta2


def _as_angle_array(value):
    arr = np.asarray(value, dtype=float)
    return arr, arr.ndim == 0


def gamma2_to_b1_polar(pair: DiscPair, theta_tilde):
    """B1-polar coordinates ``(theta, r)`` of points on Gamma2.

    ``theta_tilde`` is the B2-polar angle in ``[theta2_star, 2 pi - theta2_star]``.
    The returned angle lies in ``(-pi, pi]``; the endpoints map exactly to
    ``(+-theta1_star, 1)``.
    """
    tt, scalar = _as_angle_array(theta_tilde)
    lo, hi = pair.gamma2
    if np.any(tt < lo - _SLACK) or np.any(tt > hi + _SLACK):
        raise GeometryError("theta_tilde outside the interface arc Gamma2")
    x = pair.m + pair.R * np.cos(tt)
    y = pair.R * np.sin(tt)
    theta = np.arctan2(y, x)
    r = np.hypot(x, y)
    at_lo = np.abs(tt - lo) <= _SLACK
    at_hi = np.abs(tt - hi) <= _SLACK
    theta = np.where(at_lo, pair.theta1_star, np.where(at_hi, -pair.theta1_star, theta))
    r = np.where(at_lo | at_hi, 1.0, np.minimum(r, 1.0))
    if scalar:
        return float(theta), float(r)
    return theta, r


def gamma1_to_b2_polar(pair: DiscPair, theta):
    """B2-polar coordinates ``(theta_tilde, rho)`` of points on Gamma1.

    ``rho`` is the distance to the centre of B2 divided by ``R``; the angle is
    returned in ``[0, 2 pi)``.
    """
    th, scalar = _as_angle_array(theta)
    lo, hi = pair.gamma1
    if np.any(th < lo - _SLACK) or np.any(th > hi + _SLACK):
        raise GeometryError("theta outside the interface arc Gamma1")
    x = np.cos(th) - pair.m
    y = np.sin(th)
    tt = np.mod(np.arctan2(y, x), TWO_PI)
    rho = np.hypot(x, y) / pair.R
    at_hi = np.abs(th - hi) <= _SLACK
    at_lo = np.abs(th - lo) <= _SLACK
    tt = np.where(at_hi, pair.theta2_star, np.where(at_lo, TWO_PI - pair.theta2_star, tt))
    rho = np.where(at_lo | at_hi, 1.0, np.minimum(rho, 1.0))
    if scalar:
        return float(tt), float(rho)
    return tt, rho


def point_to_b1_polar(x, y):
    return np.arctan2(y, x), np.hypot(x, y)


def point_to_b2_polar(pair: DiscPair, x, y):
    """B2-polar angle in ``[0, 2 pi)`` and normalized radius of ``(x, y)``."""
    dx = np.asarray(x) - pair.m
    return np.mod(np.arctan2(y, dx), TWO_PI), np.hypot(dx, y) / pair.R


def _nearest_index(value: float) -> int:
    # exact half steps go to the smaller index
    return math.ceil(value - 0.5)


def snap_to_grids(theta1: float, theta2: float, n1: int, n2: int) -> SnappedScenario:
    """Closest scenario whose intersection points lie on both node grids."""
    grid = GridConfig(n1, n2)
    base = discs_from_angles(theta1, theta2)
    ell1 = _nearest_index(theta1 * n1 / TWO_PI)
    ell1 = min(max(ell1, 1), n1 // 2 - 1)
    lower = -(-ell1 * n2 // n1)
    upper = n2 // 2 - 1
    if lower > upper:
        raise InfeasibleSnapError(
            f"no admissible theta2 grid angle for ell1={ell1}, n1={n1}, n2={n2}"
        )
    ell2 = _nearest_index(theta2 * n2 / TWO_PI)
    ell2 = min(max(ell2, lower), upper)
    return _make_snapped(base, grid, ell1, ell2)


def snap_symmetric(theta1: float, n: int) -> SnappedScenario:
    """Equal-radius snapping on ``n1 = n2 = n`` with ``theta2_int = pi - theta1_int``."""
    if not 0.0 < theta1 < math.pi / 2:
        raise GeometryError("symmetric scenarios need theta1 in (0, pi/2)")
    grid = GridConfig(n, n)
    ell1 = min(max(_nearest_index(theta1 * n / TWO_PI), 1), n // 2 - 1)
    ell2 = n // 2 - ell1
    if ell2 < ell1:
        raise InfeasibleSnapError(f"theta1={theta1} snaps beyond pi/2 on n={n}")
    return _make_snapped(discs_from_angles(theta1, math.pi - theta1), grid, ell1, ell2)


def _make_snapped(base, grid, ell1, ell2):
    t1 = ell1 * TWO_PI / grid.n1
    t2 = ell2 * TWO_PI / grid.n2
    return SnappedScenario(base, grid, t1, t2, ell1, ell2, discs_from_angles(t1, t2))


def auto_n2(R: float, n1: int, factor: float = 1.0) -> int:
    """Even node count closest to ``factor * R * n1`` (at least 6)."""
    return max(6, 2 * int(round(factor * R * n1 / 2.0)))


def contraction_exact(theta1: float, theta2: float) -> float:
    """Max-norm contraction bound ``(theta2 - theta1)/pi`` of exact Schwarz."""
    _check_angles(theta1, theta2)
    return max(0.0, (theta2 - theta1) / math.pi)


def contraction_symmetric(theta1: float) -> float:
    if not 0.0 < theta1 < math.pi / 2:
        raise GeometryError("theta1 must lie in (0, pi/2)")
    return 1.0 - 2.0 * theta1 / math.pi


def contraction_unequal(theta1: float, R: float) -> float:
    """Exact-Schwarz bound for radius ``R > 1`` as a function of ``theta1``."""
    if not 0.0 < theta1 < math.pi or R <= 1.0:
        raise GeometryError("need theta1 in (0, pi) and R > 1")
    return 1.0 - (math.asin(math.sin(theta1) / R) + theta1) / math.pi
