"""Poisson kernel, its Fourier truncation and the positivity analysis built on it."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate


class KernelDomainError(ValueError):
    pass


class ResolutionError(RuntimeError):
    """The angular scan grid cannot resolve the first sign change of K_N."""


def poisson_kernel(psi, r):
    """``(1 - r^2) / (1 - 2 r cos psi + r^2)`` for ``0 <= r < 1``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r >= 1):
        raise KernelDomainError("Poisson kernel needs 0 <= r < 1")
    # (1 - r)^2 + 4 r sin^2(psi/2) avoids cancellation near psi = 0, r = 1
    return (1.0 - r) * (1.0 + r) / ((1.0 - r) ** 2 + 4.0 * r * np.sin(0.5 * np.asarray(psi)) ** 2)


def truncated_kernel(N: int, psi, r):
    """Partial sum ``1 + 2 sum_{n<=N} r^n cos(n psi)``, finite also at ``r = 1``."""
    if N < 0:
        raise KernelDomainError("N must be nonnegative")
    psi = np.asarray(psi, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > 1):
        raise KernelDomainError("truncated kernel needs 0 <= r <= 1")
    psi, r = np.broadcast_arrays(psi, r)
    total = np.ones(psi.shape)
    rn = np.ones(psi.shape)
    for n in range(1, N + 1):
        rn = rn * r
        total = total + 2.0 * rn * np.cos(n * psi)
    return total if total.ndim else float(total)


def truncated_kernel_closed(N: int, psi, r):
    """Closed form of :func:`truncated_kernel`; singular at ``(psi, r) = (0, 1)``."""
    psi = np.asarray(psi, dtype=float)
    r = np.asarray(r, dtype=float)
    num = (
        1.0
        - r * r
        - 2.0 * r ** (N + 1) * np.cos((N + 1) * psi)
        + 2.0 * r ** (N + 2) * np.cos(N * psi)
    )
    return num / (1.0 - 2.0 * r * np.cos(psi) + r * r)


def positivity_radius_theory(N: int) -> float:
    """Radius below which ``K_N`` is provably nonnegative (``N >= 4``)."""
    if N < 4:
        raise KernelDomainError("the positivity radius is established for N >= 4")
    return math.sqrt(1.0 - 2.0 * math.log(2.0 * (N + 1)) / (N + 1))


@dataclass(frozen=True)
class PositivityReport:
    N: int
    r_star_theory: float
    delta_theory: float
    delta_numeric: float
    q: float
    scan_resolution: tuple[float, float]


def kernel_grid(N: int, thetas, radii) -> np.ndarray:
    """``K_N`` on the tensor grid ``radii x thetas`` as one matrix product."""
    thetas = np.asarray(thetas, dtype=float)
    radii = np.asarray(radii, dtype=float)
    n = np.arange(1, N + 1)
    cos_table = np.cos(np.outer(n, thetas))
    powers = radii[:, None] ** n[None, :]
    return 1.0 + 2.0 * powers @ cos_table


def _min_over_angles(N, thetas, r):
    return float(kernel_grid(N, thetas, [r]).min())


def positivity_radius_numeric(
    N: int, angle_steps: int | None = None, radius_tol: float = 1e-5, radius_scan: int = 400
) -> PositivityReport:
    """Smallest boundary distance ``delta`` with ``K_N >= 0`` for all ``r <= 1 - delta``.

    ``K_N`` is even in the angle, so the scan covers ``[0, pi]`` with
    ``angle_steps + 1`` points.  The first radius at which the angular minimum
    turns negative is bracketed on a uniform radius grid and refined by
    bisection to ``radius_tol``.
    """
    r_star = positivity_radius_theory(N)
    if angle_steps is None:
        angle_steps = 16 * N
    if angle_steps < 4 * N:
        raise ResolutionError(f"angle_steps={angle_steps} below the minimum 4N={4 * N}")
    if radius_tol <= 0:
        raise ValueError("radius_tol must be positive")
    thetas = np.linspace(0.0, math.pi, angle_steps + 1)
    radii = np.linspace(0.0, 1.0, radius_scan + 1)
    mins = kernel_grid(N, thetas, radii).min(axis=1)
    negative = np.flatnonzero(mins < 0.0)
    if negative.size == 0:
        raise ResolutionError(f"no negative value of K_{N} found on the scan grid")
    i = negative[0]
    lo, hi = radii[i - 1], radii[i]
    while hi - lo > radius_tol:
        mid = 0.5 * (lo + hi)
        if _min_over_angles(N, thetas, mid) < 0.0:
            hi = mid
        else:
            lo = mid
    delta_th = 1.0 - r_star
    delta_num = float(1.0 - lo)
    return PositivityReport(
        N=N,
        r_star_theory=r_star,
        delta_theory=delta_th,
        delta_numeric=delta_num,
        q=delta_num / delta_th,
        scan_resolution=(math.pi / angle_steps, radius_tol),
    )


def epsilon_quadrature(N: int, r_upper: float) -> float:
    """``(2/pi) * int_0^r_upper s^N / (1 - s) ds`` by adaptive Gauss-Kronrod."""
    if N < 1:
        raise KernelDomainError("N must be >= 1")
    if not 0.0 <= r_upper < 1.0:
        raise KernelDomainError("r_upper must lie in [0, 1)")
    if r_upper == 0.0:
        return 0.0

    def integrand(t):
        s = r_upper * t
        return r_upper * s**N / (1.0 - s)

    value, err = integrate.quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200)
    if err > 1e-7 * abs(value):
        raise ArithmeticError(f"epsilon quadrature did not converge (err={err:g})")
    return 2.0 / math.pi * value


def epsilon_series(N: int, x: float, tol: float = 1e-16) -> float:
    """Tail series ``(1/pi) sum_{n>N} 2 x^n / n``; equals the epsilon integral."""
    total, n, term = 0.0, N + 1, 1.0
    xn = x ** (N + 1)
    while True:
        term = 2.0 * xn / n
        total += term
        if term < tol * total:
            break
        n += 1
        xn *= x
    return total / math.pi


def alpha(N: int) -> float:
    return 2.0 * math.log(2.0 * (N + 1)) / (N + 1)


def epsilon_bound(N: int) -> float:
    """Closed-form upper bound for ``epsilon_quadrature(N, r_N*)``."""
    a = alpha(N)
    if N < 4 or a >= 1.0:
        raise KernelDomainError("the epsilon bound needs N >= 4")
    return math.log(2.0 / a) / math.sqrt(1.0 - a) / (N + 1) / math.pi


def lambert_w(z: float, tol: float = 1e-15, maxiter: int = 100) -> float:
    """Principal branch of the Lambert W function for ``z >= 0``.

    Halley iteration from ``ln(1 + z)``, kept inside the bracket
    ``[0, ln(1 + z)]`` by falling back to bisection.
    """
    z = float(z)
    if z < 0 or math.isnan(z):
        raise KernelDomainError("lambert_w is implemented for z >= 0")
    if z == 0.0:
        return 0.0
    lo, hi = 0.0, math.log1p(z)
    w = hi
    for _ in range(maxiter):
        ew = math.exp(w)
        f = w * ew - z
        if f == 0.0:
            return w
        if f > 0:
            hi = w
        else:
            lo = w
        fp = ew * (w + 1.0)
        step = f / (fp - (w + 2.0) * f / (2.0 * w + 2.0))
        w_new = w - step
        if not lo < w_new < hi:
            w_new = 0.5 * (lo + hi)
        if abs(w_new - w) <= tol * max(1.0, abs(w_new)):
            return w_new
        w = w_new
    return w


def hoorfar_bounds(z: float) -> tuple[float, float]:
    """Lower/upper bounds ``ln z - ln ln z`` and ``ln z - 0.5 ln ln z`` (``z >= e``)."""
    if z < math.e:
        raise KernelDomainError("Hoorfar bounds hold for z >= e")
    lz = math.log(z)
    llz = math.log(lz)
    return lz - llz, lz - 0.5 * llz


@dataclass(frozen=True)
class InequalityCheck:
    N: int
    ok: bool
    failed: tuple[str, ...]
    values: dict = field(default_factory=dict)


def verify_positivity_inequality(N: int) -> InequalityCheck:
    """Numerically re-check the chain of inequalities behind the positivity radius."""
    if N < 4:
        raise KernelDomainError("N must be >= 4")
    x = 0.5 * (N + 1)
    z = 4.0 * x
    w = lambert_w(z)
    y0 = 4.0 * math.exp(-w)
    y0_hat = math.log(z) / x
    lower, upper = hoorfar_bounds(z)
    values = {
        "x": x,
        "W(4x)": w,
        "y0": y0,
        "y0_hat": y0_hat,
        "residual": y0 - 4.0 * (1.0 - y0) ** x,
        "hoorfar_lower": lower,
        "hoorfar_upper": upper,
    }
    failed = []
    if values["residual"] < -1e-12:
        failed.append("y0 - 4(1-y0)^x >= 0")
    if y0_hat < y0:
        failed.append("y0_hat >= y0")
    if not y0_hat < 1.0:
        failed.append("y0_hat < 1")
    if not lower - 1e-14 <= w <= upper + 1e-14:
        failed.append("Hoorfar sandwich")
    return InequalityCheck(N, not failed, tuple(failed), values)
