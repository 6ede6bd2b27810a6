"""Boundary data on a circle, Fourier projection/interpolation and harmonic extension.

Angles are in radians.  A :class:`FourierCoeffs` object stores the coefficients
of ``A_0/2 + sum_n (A_n cos(n t) + B_n sin(n t))`` (plus an optional half-weighted
Nyquist cosine for interpolants on an even node count); its harmonic extension to
the unit disc multiplies mode ``n`` by ``r**n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .kernels import poisson_kernel

TWO_PI = 2.0 * math.pi

Piece = Callable[[np.ndarray], np.ndarray]


class QuadratureError(ArithmeticError):
    """Requested quadrature accuracy could not be reached."""


class AccuracyError(QuadratureError):
    """Evaluation point too close to the circle for the Poisson quadrature."""


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def panel_nodes(edges: Sequence[float], order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on consecutive panels ``edges[i]..edges[i+1]``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _constant(c: float) -> Piece:
    c = float(c)
    return lambda t: np.full(np.shape(t), c)


def _as_piece(f) -> Piece:
    return f if callable(f) else _constant(f)


@dataclass(frozen=True)
class BoundaryFn:
    """Piecewise continuous function on the circle.

    ``breaks`` is an increasing tuple spanning less than one turn; piece ``i``
    lives on ``[breaks[i], breaks[i+1]]`` and the last one wraps around to
    ``breaks[0] + 2 pi``.  Pieces receive angles in that unwrapped window.
    Without breaks there is a single piece on ``[0, 2 pi]``.  At a break the
    function takes its right limit.  ``knots`` are extra angles where a piece
    is continuous but not smooth (spline knots); quadratures split there too.
    """

    breaks: tuple[float, ...]
    pieces: tuple[Piece, ...]
    knots: tuple[float, ...] = ()

    def __post_init__(self):
        b = tuple(float(v) for v in self.breaks)
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "pieces", tuple(_as_piece(p) for p in self.pieces))
        object.__setattr__(self, "knots", tuple(float(k) for k in self.knots))
        if len(self.pieces) != max(len(b), 1):
            raise ValueError("need one piece per arc")
        if any(y <= x for x, y in zip(b, b[1:])) or (b and b[-1] - b[0] >= TWO_PI):
            raise ValueError("breaks must be increasing and span less than 2 pi")

    @classmethod
    def smooth(cls, f) -> "BoundaryFn":
        return cls((), (f,))

    @classmethod
    def constant(cls, c: float) -> "BoundaryFn":
        return cls((), (_constant(c),))

    @classmethod
    def on_arc(cls, a: float, b: float, inner, outer=0.0) -> "BoundaryFn":
        """``inner`` on the arc ``[a, b]``, ``outer`` on the rest of the circle."""
        return cls((a, b), (inner, outer))

    @classmethod
    def indicator(cls, a: float, b: float) -> "BoundaryFn":
        return cls.on_arc(a, b, 1.0, 0.0)

    @property
    def start(self) -> float:
        return self.breaks[0] if self.breaks else 0.0

    def arcs(self) -> list[tuple[float, float, Piece]]:
        if not self.breaks:
            return [(0.0, TWO_PI, self.pieces[0])]
        ends = self.breaks[1:] + (self.breaks[0] + TWO_PI,)
        return list(zip(self.breaks, ends, self.pieces))

    @property
    def breakpoints(self) -> list[float]:
        return sorted(math.fmod(b, TWO_PI) % TWO_PI for b in self.breaks)

    @property
    def cuts(self) -> list[float]:
        """Breakpoints and knots in ``[0, 2 pi)``: where quadrature panels must end."""
        return sorted({b % TWO_PI for b in self.breaks + self.knots})

    def one_sided_limits(self) -> list[tuple[float, float, float]]:
        """``(z, g_minus, g_plus)`` for every break, ``z`` reduced to ``[0, 2 pi)``."""
        out = []
        arcs = self.arcs()
        for i, (a, _, f) in enumerate(arcs):
            pa, pb, pf = arcs[i - 1]
            left = float(pf(np.array([pb]))[0])
            right = float(f(np.array([a]))[0])
            out.append((a % TWO_PI, left, right))
        return out

    def discontinuities(self, tol: float = 1e-12) -> list[float]:
        return [z for z, gm, gp in self.one_sided_limits() if abs(gp - gm) > tol]

    def __call__(self, theta):
        t = np.asarray(theta, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        s = self.start
        u = s + np.mod(t - s, TWO_PI)
        out = np.empty_like(u)
        if not self.breaks:
            out[:] = self.pieces[0](u)
        else:
            idx = np.searchsorted(np.asarray(self.breaks), u, side="right") - 1
            for i, (_, _, f) in enumerate(self.arcs()):
                mask = idx == i
                if mask.any():
                    out[mask] = f(u[mask])
        return float(out[0]) if scalar else out.reshape(np.shape(theta))


@dataclass(frozen=True, eq=False)
class FourierCoeffs:
    a0: float
    a: np.ndarray
    b: np.ndarray
    nyquist: float | None = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("cosine and sine coefficient arrays must match")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a0", float(self.a0))

    @property
    def N(self) -> int:
        return len(self.a)

    def __call__(self, theta, r=1.0):
        return harmonic_eval(self, theta, r)

    def as_vector(self) -> np.ndarray:
        tail = [] if self.nyquist is None else [self.nyquist]
        return np.concatenate([[self.a0], self.a, self.b, tail])

    def __sub__(self, other: "FourierCoeffs") -> "FourierCoeffs":
        ny = None
        if self.nyquist is not None or other.nyquist is not None:
            ny = (self.nyquist or 0.0) - (other.nyquist or 0.0)
        return FourierCoeffs(self.a0 - other.a0, self.a - other.a, self.b - other.b, ny)


def harmonic_eval(coeffs: FourierCoeffs, theta, r=1.0):
    """Harmonic extension of the trigonometric polynomial at polar points ``(theta, r)``."""
    theta = np.asarray(theta, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > 1):
        raise ValueError("harmonic_eval needs 0 <= r <= 1")
    theta, r = np.broadcast_arrays(theta, r)
    out = np.full(theta.shape, 0.5 * coeffs.a0)
    N = coeffs.N
    if N:
        n = np.arange(1, N + 1)
        ang = theta[..., None] * n
        rn = r[..., None] ** n
        out = out + np.sum(rn * (coeffs.a * np.cos(ang) + coeffs.b * np.sin(ang)), axis=-1)
    if coeffs.nyquist is not None:
        k = N + 1
        out = out + 0.5 * coeffs.nyquist * r**k * np.cos(k * theta)
    return float(out) if out.ndim == 0 else out


def _arc_coefficients(g: BoundaryFn, N: int, density: int, order: int):
    nodes, weights = [], []
    knots = np.asarray(g.knots)
    for a, b, f in g.arcs():
        inner = np.sort(a + np.mod(knots - a, TWO_PI))
        edges = [a, *inner[(inner > a) & (inner < b)], b]
        fine = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            panels = max(1, math.ceil((hi - lo) * density / TWO_PI))
            fine.extend(np.linspace(lo, hi, panels + 1)[:-1])
        x, w = panel_nodes([*fine, b], order)
        nodes.append(x)
        weights.append(w * f(x))
    x = np.concatenate(nodes)
    wg = np.concatenate(weights)
    n = np.arange(N + 1)
    ang = np.outer(n, x)
    A = np.cos(ang) @ wg / math.pi
    B = np.sin(ang) @ wg / math.pi
    return A, B


def project(g: BoundaryFn, N: int, rtol: float = 1e-10, order: int = 20) -> FourierCoeffs:
    """L2-orthogonal projection onto trigonometric polynomials of degree ``N``.

    Coefficient integrals are split at the breaks of ``g`` and evaluated with
    composite Gauss-Legendre; the panel count is doubled until two successive
    resolutions agree to ``rtol``.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    density = 8 * (N + 8) // 4
    A, B = _arc_coefficients(g, N, density, order)
    for _ in range(6):
        density *= 2
        A2, B2 = _arc_coefficients(g, N, density, order)
        scale = max(1.0, float(np.max(np.abs(A2))), float(np.max(np.abs(B2))))
        diff = max(float(np.max(np.abs(A2 - A))), float(np.max(np.abs(B2 - B))))
        A, B = A2, B2
        if diff <= rtol * scale:
            return FourierCoeffs(A[0], A[1:], B[1:])
    raise QuadratureError(f"projection coefficients not converged (diff={diff:.3g})")


@dataclass(frozen=True, eq=False)
class InterpMatrices:
    n1: int
    C: np.ndarray
    S: np.ndarray


@lru_cache(maxsize=64)
def interp_matrices(n1: int) -> InterpMatrices:
    """Matrices mapping nodal values to cosine (``C``) and sine (``S``) coefficients."""
    if n1 < 6 or n1 % 2:
        raise ValueError("n1 must be an even integer >= 6")
    x = np.arange(n1) * TWO_PI / n1
    h = n1 // 2
    C = (2.0 / n1) * np.cos(np.outer(x, np.arange(h + 1)))
    S = (2.0 / n1) * np.sin(np.outer(x, np.arange(1, h)))
    C.setflags(write=False)
    S.setflags(write=False)
    return InterpMatrices(n1, C, S)


def nodes(n: int) -> np.ndarray:
    return np.arange(n) * TWO_PI / n


def interpolate(samples, method: str = "auto") -> FourierCoeffs:
    """Trigonometric interpolant of values at the equidistant nodes ``l * 2 pi / n``."""
    w = np.asarray(samples, dtype=float)
    n1 = w.size
    if n1 < 6 or n1 % 2:
        raise ValueError("need an even number (>= 6) of samples")
    if method == "auto":
        method = "matrix" if n1 <= 256 else "fft"
    h = n1 // 2
    if method == "matrix":
        mats = interp_matrices(n1)
        a = w @ mats.C
        b = w @ mats.S
    elif method == "fft":
        X = np.fft.rfft(w)
        a = (2.0 / n1) * X.real
        b = -(2.0 / n1) * X.imag[1:h]
    else:
        raise ValueError(f"unknown interpolation method {method!r}")
    return FourierCoeffs(a[0], a[1:h], b, nyquist=a[h])


def _poisson_panels(g: BoundaryFn, theta: float, r: float) -> np.ndarray:
    lo, hi = theta - math.pi, theta + math.pi
    cuts = {lo, hi, theta}
    for z in g.cuts:
        zz = lo + (z - lo) % TWO_PI
        if lo < zz < hi:
            cuts.add(zz)
    d = 1.0 - r
    while d < math.pi:
        cuts.add(theta - d)
        cuts.add(theta + d)
        d *= 2.0
    edges = np.array(sorted(c for c in cuts if lo <= c <= hi))
    # cap the panel width so smooth data is resolved regardless of r
    widths = np.diff(edges)
    splits = np.maximum(1, np.ceil(widths / (math.pi / 8))).astype(int)
    refined = [edges[0]]
    for a, b, k in zip(edges[:-1], edges[1:], splits):
        refined.extend(np.linspace(a, b, k + 1)[1:])
    return np.asarray(refined)


def _poisson_single(g: BoundaryFn, theta: float, r: float, rtol: float) -> float:
    edges = _poisson_panels(g, theta, r)
    results = []
    for order in (12, 24):
        x, w = panel_nodes(edges, order)
        results.append(float(np.sum(w * poisson_kernel(theta - x, r) * g(x))) / TWO_PI)
    coarse, fine = results
    if abs(fine - coarse) > rtol * max(1.0, abs(fine)):
        edges = np.sort(np.concatenate([edges, 0.5 * (edges[1:] + edges[:-1])]))
        x, w = panel_nodes(edges, 24)
        finer = float(np.sum(w * poisson_kernel(theta - x, r) * g(x))) / TWO_PI
        if abs(finer - fine) > rtol * max(1.0, abs(finer)):
            raise AccuracyError(f"Poisson quadrature not converged at (theta={theta}, r={r})")
        fine = finer
    return fine


def poisson_eval(g: BoundaryFn, theta, r, rtol: float = 1e-8, r_max: float = 1.0 - 1e-6):
    """Poisson integral of ``g`` at polar points ``(theta, r)`` with ``r < 1``."""
    theta = np.asarray(theta, dtype=float)
    r = np.asarray(r, dtype=float)
    theta, r = np.broadcast_arrays(theta, r)
    if np.any(r < 0):
        raise ValueError("negative radius")
    if np.any(r > r_max):
        raise AccuracyError(f"r > {r_max}: too close to the circle, use a series method")
    out = np.array([_poisson_single(g, t, rr, rtol) for t, rr in zip(theta.ravel(), r.ravel())])
    return float(out[0]) if theta.ndim == 0 else out.reshape(theta.shape)


def arc_value_oracle(theta_star: float, theta_tilde_star: float) -> float:
    """Constant value of the harmonic extension of the indicator of
    ``[-theta_star, theta_star]`` on the circular arc through its endpoints that
    meets the x-axis at angle ``theta_tilde_star``."""
    if not 0.0 < theta_star <= theta_tilde_star < math.pi:
        raise ValueError("need 0 < theta_star <= theta_tilde_star < pi")
    return (theta_tilde_star - theta_star) / math.pi


def curve_limit(g_minus: float, g_plus: float, slope: float, side: int) -> float:
    """Limit of the harmonic extension along a curve ending at a jump of the data."""
    if side not in (-1, 1):
        raise ValueError("side must be -1 or +1")
    if math.isinf(slope):
        frac = 0.5
    else:
        frac = math.acos(1.0 / math.sqrt(1.0 + slope * slope)) / math.pi
    return 0.5 * (g_plus + g_minus) + (g_plus - g_minus) * side * frac


def _neville_at_zero(h: np.ndarray, v: np.ndarray) -> float:
    p = list(v)
    n = len(h)
    for k in range(1, n):
        for i in range(n - k):
            p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i])
    return p[0]


def curve_limit_verify(g: BoundaryFn, slope: float, samples: int = 8, use: int = 4) -> float:
    """Deviation between the extrapolated quadrature limit and :func:`curve_limit`.

    The curve is ``theta(r) = slope * (1 - r)``, approaching the break at angle
    0 from the side ``sign(slope)``.  ``u`` is evaluated at ``r = 1 - 2**-k`` for
    ``k = 3 .. samples + 2`` and the last ``use`` values are extrapolated to
    ``r = 1`` with a polynomial in ``1 - r``.
    """
    limits = {round(z, 12) % TWO_PI: (gm, gp) for z, gm, gp in g.one_sided_limits()}
    if 0.0 not in limits:
        raise ValueError("g needs a break at angle 0")
    g_minus, g_plus = limits[0.0]
    side = 1 if slope >= 0 else -1
    h = 2.0 ** -np.arange(3, samples + 3)
    vals = np.array([poisson_eval(g, slope * hk, 1.0 - hk, rtol=1e-11) for hk in h])
    extrapolated = _neville_at_zero(h[-use:], vals[-use:])
    return abs(extrapolated - curve_limit(g_minus, g_plus, slope, side))


def dirichlet_kernel(N: int, theta):
    theta = np.asarray(theta, dtype=float)
    half = 0.5 * theta
    small = np.abs(np.sin(half)) < 1e-12
    safe = np.where(small, 1.0, np.sin(half))
    return np.where(small, 2.0 * N + 1.0, np.sin((N + 0.5) * theta) / safe)


def lebesgue_constant(N: int, order: int = 32) -> float:
    """``(1/2 pi) int |D_N|`` with panels between consecutive zeros of ``D_N``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    zeros = TWO_PI * np.arange(N + 1) / (2 * N + 1)
    edges = np.append(zeros, math.pi)
    x, w = panel_nodes(edges, order)
    return float(np.sum(w * np.abs(dirichlet_kernel(N, x)))) / math.pi
