"""Additive and multiplicative Schwarz iterations on two overlapping discs.

Each disc solve takes the boundary data ``g`` on the part of its circle outside
the other disc and the other disc's current iterate on its interface arc.  The
solve is exact (Poisson integral), a Fourier projection of degree ``N`` or a
trigonometric interpolation on the disc's node grid, followed by harmonic
extension.  B2 is handled in normalized polar coordinates about its centre.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .dtd import gamma2_interior_flags, q_mask
from .fourier import BoundaryFn, FourierCoeffs, harmonic_eval, interpolate, poisson_eval, project
from .geometry import (
    TWO_PI,
    DiscPair,
    GeometryError,
    SnappedScenario,
    gamma1_to_b2_polar,
    gamma2_to_b1_polar,
    point_to_b1_polar,
    point_to_b2_polar,
)

VARIANTS = ("exact", "projection", "interpolation")
MODES = ("additive", "multiplicative")


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class SchwarzConfig:
    scenario: DiscPair | SnappedScenario
    variant: str = "exact"
    mode: str = "additive"
    N: int | None = None
    max_sweeps: int = 100
    tol: float = 1e-8
    trace_samples: int = 101

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.tol <= 0 or self.max_sweeps < 1:
            raise ValueError("need tol > 0 and max_sweeps >= 1")
        if self.trace_samples < 3:
            raise ValueError("need at least 3 trace samples")
        if self.variant == "interpolation":
            if not isinstance(self.scenario, SnappedScenario):
                raise GeometryError("the interpolation variant needs a grid-snapped scenario")
            n = self.scenario.n1 // 2 - 1
            if self.N is not None and self.N != n:
                raise ValueError(f"N={self.N} inconsistent with n1={self.scenario.n1}")
        elif self.variant == "projection" and (self.N is None or self.N < 1):
            raise ValueError("the projection variant needs N >= 1")

    @property
    def pair(self) -> DiscPair:
        s = self.scenario
        return s.pair if isinstance(s, SnappedScenario) else s


@dataclass(frozen=True, eq=False)
class SchwarzState:
    """Current iterates ``u1``, ``u2`` and their traces on the other disc's arc.

    ``t1`` holds ``u2`` on the Gamma1 samples and ``t2`` holds ``u1`` on the
    Gamma2 samples.  ``u1``/``u2`` are boundary data (exact variant) or
    :class:`FourierCoeffs`.
    """

    u1: object
    u2: object
    t1: np.ndarray
    t2: np.ndarray


@dataclass(frozen=True, eq=False)
class IterationTrace:
    updates: np.ndarray
    updates_gamma1: np.ndarray
    updates_gamma2: np.ndarray
    errors: np.ndarray | None
    node_errors: np.ndarray | None
    ratios: np.ndarray
    state: SchwarzState
    converged: bool
    sweeps: int
    samples: tuple[np.ndarray, np.ndarray] = field(default=None)


@dataclass(frozen=True, eq=False)
class ManufacturedSolution:
    kind: str
    evaluator: Callable
    params: dict

    def trace(self, x, y):
        return self.evaluator(x, y)


def _overlap_points(pair: DiscPair, count: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < count:
        x = rng.uniform(pair.m - pair.R, 1.0)
        y = rng.uniform(-1.0, 1.0)
        if x * x + y * y < 1.0 and (x - pair.m) ** 2 + y * y < pair.R**2:
            pts.append((x, y))
    return np.array(pts)


def _domain_points(pair: DiscPair, count: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < count:
        x = rng.uniform(-1.0, pair.m + pair.R)
        y = rng.uniform(-max(1.0, pair.R), max(1.0, pair.R))
        if x * x + y * y < 1.0 or (x - pair.m) ** 2 + y * y < pair.R**2:
            pts.append((x, y))
    return np.array(pts)


def _distance_to_domain(pair: DiscPair, x0: tuple[float, float]) -> float:
    d1 = math.hypot(*x0) - 1.0
    d2 = math.hypot(x0[0] - pair.m, x0[1]) - pair.R
    return min(d1, d2)


def laplacian_residual(f, pts, h: float = 2e-3) -> np.ndarray:
    """5-point Laplacian at ``pts`` with one Richardson step (``h`` and ``h/2``)."""
    x, y = pts[:, 0], pts[:, 1]

    def five_point(step):
        return (
            f(x + step, y) + f(x - step, y) + f(x, y + step) + f(x, y - step) - 4.0 * f(x, y)
        ) / step**2

    return (4.0 * five_point(0.5 * h) - five_point(h)) / 3.0


def manufactured(
    kind: str, pair: DiscPair, k: int = 2, x0: tuple[float, float] | None = None
) -> ManufacturedSolution:
    """Harmonic test solution: ``Re (x + i y)^k`` or ``ln |(x, y) - x0|``."""
    if kind == "harmonic_polynomial":
        if not 0 <= k <= 6:
            raise ValueError("k must lie in 0..6")

        def f(x, y):
            return np.real((np.asarray(x) + 1j * np.asarray(y)) ** k)

        params = {"k": k}
    elif kind == "log_source":
        if x0 is None:
            raise ValueError("log_source needs x0")
        if _distance_to_domain(pair, x0) < 0.1:
            raise GeometryError("source point must lie at least 0.1 outside the domain")
        a, b = float(x0[0]), float(x0[1])

        def f(x, y):
            return 0.5 * np.log((np.asarray(x) - a) ** 2 + (np.asarray(y) - b) ** 2)

        params = {"x0": (a, b)}
    else:
        raise ValueError(f"unknown manufactured solution {kind!r}")
    pts = _domain_points(pair, 100)
    if np.max(np.abs(laplacian_residual(f, pts))) > 1e-6:
        raise ArithmeticError("manufactured solution is not harmonic")
    return ManufacturedSolution(kind, f, params)


class _Discretization:
    """Subdomain solves and interface sampling shared by all variants."""

    def __init__(self, config: SchwarzConfig, g: Callable):
        self.config = config
        self.pair = pair = config.pair
        self.g = g
        t1, t2 = pair.theta1_star, pair.theta2_star
        self.z1 = pair.z1
        self.z2 = pair.z2
        self.g_z1 = float(g(*self.z1))
        self.g_z2 = float(g(*self.z2))
        if config.variant == "interpolation":
            sc = config.scenario
            self.s1 = np.arange(-sc.ell1, sc.ell1 + 1) * TWO_PI / sc.n1
            self.s2 = np.arange(sc.ell2, sc.n2 - sc.ell2 + 1) * TWO_PI / sc.n2
        else:
            k = config.trace_samples
            self.s1 = np.linspace(-t1, t1, k)
            self.s2 = np.linspace(t2, TWO_PI - t2, k)

    # boundary data of g on the outer arcs, as functions of each disc's polar angle
    def g1(self, t):
        return self.g(np.cos(t), np.sin(t))

    def g2(self, t):
        p = self.pair
        return self.g(p.m + p.R * np.cos(t), p.R * np.sin(t))

    def points1(self):
        """Physical coordinates of the Gamma1 samples, ends pinned to ``z2``, ``z1``."""
        x, y = np.cos(self.s1), np.sin(self.s1)
        (x[0], y[0]), (x[-1], y[-1]) = self.z2, self.z1
        return x, y

    def points2(self):
        p = self.pair
        x, y = p.m + p.R * np.cos(self.s2), p.R * np.sin(self.s2)
        (x[0], y[0]), (x[-1], y[-1]) = self.z1, self.z2
        return x, y

    def initial(self) -> SchwarzState:
        raise NotImplementedError

    def solve1(self, u2, t1):
        raise NotImplementedError

    def solve2(self, u1, t2):
        raise NotImplementedError

    def trace2(self, u1) -> np.ndarray:
        raise NotImplementedError

    def trace1(self, u2) -> np.ndarray:
        raise NotImplementedError

    def eval1(self, u1, x, y):
        raise NotImplementedError

    def eval2(self, u2, x, y):
        raise NotImplementedError

    def _with_ends(self, interior, first, last):
        return np.concatenate([[first], interior, [last]])


class _Exact(_Discretization):
    """Interface samples with cubic-spline reassembly and Poisson-integral solves."""

    def _linear_start(self, s, first, last):
        return first + (last - first) * (s - s[0]) / (s[-1] - s[0])

    def initial(self):
        u1 = self.solve1(None, self._linear_start(self.s1, self.g_z2, self.g_z1))
        u2 = self.solve2(None, self._linear_start(self.s2, self.g_z1, self.g_z2))
        return SchwarzState(u1, u2, self.trace1(u2), self.trace2(u1))

    def solve1(self, u2, t1):
        p = self.pair
        spline = CubicSpline(self.s1, t1)
        return BoundaryFn((-p.theta1_star, p.theta1_star), (spline, self.g1), tuple(self.s1))

    def solve2(self, u1, t2):
        p = self.pair
        spline = CubicSpline(self.s2, t2)
        return BoundaryFn((p.theta2_star, TWO_PI - p.theta2_star), (spline, self.g2), tuple(self.s2))

    def trace2(self, u1):
        theta, r = gamma2_to_b1_polar(self.pair, self.s2[1:-1])
        return self._with_ends(poisson_eval(u1, theta, r), self.g_z1, self.g_z2)

    def trace1(self, u2):
        tt, rho = gamma1_to_b2_polar(self.pair, self.s1[1:-1])
        return self._with_ends(poisson_eval(u2, tt, rho), self.g_z2, self.g_z1)

    def eval1(self, u1, x, y):
        return poisson_eval(u1, *point_to_b1_polar(x, y))

    def eval2(self, u2, x, y):
        return poisson_eval(u2, *point_to_b2_polar(self.pair, x, y))


class _Projection(_Discretization):
    """Degree-N Fourier coefficients per disc."""

    def initial(self):
        p = self.pair
        d1 = BoundaryFn((-p.theta1_star, p.theta1_star), (0.0, self.g1))
        d2 = BoundaryFn((p.theta2_star, TWO_PI - p.theta2_star), (0.0, self.g2))
        u1 = project(d1, self.config.N)
        u2 = project(d2, self.config.N)
        return SchwarzState(u1, u2, self.trace1(u2), self.trace2(u1))

    def solve1(self, u2, t1):
        p = self.pair

        def inner(t):
            return harmonic_eval(u2, *gamma1_to_b2_polar(p, t))

        return project(BoundaryFn((-p.theta1_star, p.theta1_star), (inner, self.g1)), self.config.N)

    def solve2(self, u1, t2):
        p = self.pair

        def inner(t):
            return harmonic_eval(u1, *gamma2_to_b1_polar(p, t))

        data = BoundaryFn((p.theta2_star, TWO_PI - p.theta2_star), (inner, self.g2))
        return project(data, self.config.N)

    def trace2(self, u1):
        return harmonic_eval(u1, *gamma2_to_b1_polar(self.pair, self.s2))

    def trace1(self, u2):
        return harmonic_eval(u2, *gamma1_to_b2_polar(self.pair, self.s1))

    def eval1(self, u1, x, y):
        theta, r = point_to_b1_polar(x, y)
        return harmonic_eval(u1, theta, np.minimum(r, 1.0))

    def eval2(self, u2, x, y):
        theta, rho = point_to_b2_polar(self.pair, x, y)
        return harmonic_eval(u2, theta, np.minimum(rho, 1.0))


class _Interpolation(_Projection):
    """Nodal values on each disc's grid, interpolated and harmonically extended.

    The interface samples are the grid nodes on each arc; the end nodes are the
    intersection points, where both discs carry the nodal value ``g(z)``.
    """

    def __init__(self, config, g):
        super().__init__(config, g)
        sc = config.scenario
        self.x1 = np.arange(sc.n1) * TWO_PI / sc.n1
        self.x2 = np.arange(sc.n2) * TWO_PI / sc.n2
        self.inner1 = q_mask(sc).interior_flags
        self.inner2 = gamma2_interior_flags(sc)
        self.outer1 = self.g1(self.x1)
        self.outer2 = self.g2(self.x2)
        # node index of each interior Gamma1/Gamma2 sample
        self.idx1 = np.arange(-sc.ell1 + 1, sc.ell1) % sc.n1
        self.idx2 = np.arange(sc.ell2 + 1, sc.n2 - sc.ell2)

    def initial(self):
        w1 = np.where(self.inner1, 0.0, self.outer1)
        w2 = np.where(self.inner2, 0.0, self.outer2)
        u1, u2 = interpolate(w1), interpolate(w2)
        return SchwarzState(u1, u2, self.trace1(u2), self.trace2(u1))

    def solve1(self, u2, t1):
        w = self.outer1.copy()
        w[self.idx1] = t1[1:-1]
        return interpolate(w)

    def solve2(self, u1, t2):
        w = self.outer2.copy()
        w[self.idx2] = t2[1:-1]
        return interpolate(w)

    def trace2(self, u1):
        theta, r = gamma2_to_b1_polar(self.pair, self.s2[1:-1])
        return self._with_ends(harmonic_eval(u1, theta, r), self.g_z1, self.g_z2)

    def trace1(self, u2):
        tt, rho = gamma1_to_b2_polar(self.pair, self.s1[1:-1])
        return self._with_ends(harmonic_eval(u2, tt, rho), self.g_z2, self.g_z1)


_DISCRETIZATIONS = {"exact": _Exact, "projection": _Projection, "interpolation": _Interpolation}


def discretization(config: SchwarzConfig, g: Callable) -> _Discretization:
    return _DISCRETIZATIONS[config.variant](config, g)


def sweep(state: SchwarzState, config: SchwarzConfig, g: Callable, disc=None) -> SchwarzState:
    """One Schwarz sweep; ``disc`` may be passed to reuse a prepared discretization."""
    disc = disc or discretization(config, g)
    u1 = disc.solve1(state.u2, state.t1)
    t2 = disc.trace2(u1)
    if config.mode == "additive":
        u2 = disc.solve2(state.u1, state.t2)
    else:
        u2 = disc.solve2(u1, t2)
    t1 = disc.trace1(u2)
    return SchwarzState(u1, u2, t1, t2)


def run(
    config: SchwarzConfig,
    g: Callable,
    u0: SchwarzState | None = None,
    exact: Callable | None = None,
) -> IterationTrace:
    """Iterate :func:`sweep` until the interface update is below ``tol``.

    ``exact`` (a harmonic function of ``(x, y)``) enables the error columns:
    the sup error of both interface traces and the error at the two
    intersection points.
    """
    disc = discretization(config, g)
    state = u0 if u0 is not None else disc.initial()
    if exact is not None:
        ref1 = exact(*disc.points1())
        ref2 = exact(*disc.points2())
    upd, upd1, upd2, errs, node_errs = [], [], [], [], []
    converged = False
    for _ in range(config.max_sweeps):
        new = sweep(state, config, g, disc)
        d1 = float(np.max(np.abs(new.t1 - state.t1)))
        d2 = float(np.max(np.abs(new.t2 - state.t2)))
        upd1.append(d1)
        upd2.append(d2)
        upd.append(max(d1, d2))
        if exact is not None:
            e1 = np.abs(new.t1 - ref1)
            e2 = np.abs(new.t2 - ref2)
            errs.append(max(e1.max(), e2.max()))
            node_errs.append(max(e1[0], e1[-1], e2[0], e2[-1]))
        state = new
        if upd[-1] <= config.tol:
            converged = True
            break
    updates = np.array(upd)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = updates[1:] / updates[:-1]
    return IterationTrace(
        updates=updates,
        updates_gamma1=np.array(upd1),
        updates_gamma2=np.array(upd2),
        errors=np.array(errs) if exact is not None else None,
        node_errors=np.array(node_errs) if exact is not None else None,
        ratios=ratios,
        state=state,
        converged=converged,
        sweeps=len(upd),
        samples=(disc.s1, disc.s2),
    )


def observed_rate(trace) -> float:
    """Geometric mean of successive update ratios over the last half of the trace."""
    e = np.asarray(trace.updates if isinstance(trace, IterationTrace) else trace, dtype=float)
    floor = 100.0 * np.finfo(float).eps
    below = np.flatnonzero(e <= floor)
    if below.size:
        e = e[: below[0]]
    if e.size < 4:
        raise InsufficientDataError("need at least 4 sweeps with updates above roundoff")
    k = e.size // 2
    return float((e[-1] / e[k - 1]) ** (1.0 / (e.size - k)))


def overlap_values(config: SchwarzConfig, g: Callable, state: SchwarzState, count: int = 50):
    """``(points, u1, u2)`` at ``count`` deterministic points of the overlap."""
    disc = discretization(config, g)
    pts = _overlap_points(config.pair, count)
    x, y = pts[:, 0], pts[:, 1]
    return pts, np.asarray(disc.eval1(state.u1, x, y)), np.asarray(disc.eval2(state.u2, x, y))
