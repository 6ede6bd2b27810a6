"""Dirichlet-to-Dirichlet maps from the interface arc of B1 to the arc Gamma2.

Data ``v`` lives on ``Gamma1 = [-theta1*, theta1*]`` (B1-polar angle) and is
extended by zero to the rest of the unit circle.  Its harmonic extension, exact
or after projection/interpolation, is sampled along ``Gamma2`` using the
B2-polar angle ``theta_tilde`` in ``[theta2*, 2 pi - theta2*]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fourier import (
    BoundaryFn,
    FourierCoeffs,
    _neville_at_zero,
    harmonic_eval,
    interp_matrices,
    poisson_eval,
    project,
)
from .geometry import (
    TWO_PI,
    DiscPair,
    SnappedScenario,
    gamma1_to_b2_polar,
    gamma2_to_b1_polar,
)
from .kernels import positivity_radius_theory


class AssumptionError(ValueError):
    """Interpolation analysis requested on a scenario that is not grid-aligned."""


@dataclass(frozen=True, eq=False)
class DtDProfile:
    scenario: DiscPair
    variant: str
    N: int | None
    thetas: np.ndarray
    values: np.ndarray
    radii: np.ndarray
    endpoint_values: tuple[float, float]
    grid_marks: np.ndarray | None = None

    def in_positive_region(self, N: int | None = None) -> np.ndarray:
        """Samples with ``r <= r_N*`` where the restricted maximum principle holds."""
        N = self.N if N is None else N
        return self.radii <= positivity_radius_theory(N)


def _interface_data(pair: DiscPair, v) -> BoundaryFn:
    if isinstance(v, BoundaryFn):
        inner = v
    elif callable(v):
        inner = v
    else:
        inner = float(v)
    return BoundaryFn.on_arc(-pair.theta1_star, pair.theta1_star, inner, 0.0)


def _open_arc(pair: DiscPair, samples: int) -> np.ndarray:
    lo, hi = pair.gamma2
    offset = (hi - lo) / (10.0 * samples)
    return np.linspace(lo + offset, hi - offset, samples)


def _endpoint_limit(data: BoundaryFn, pair: DiscPair, end: int, levels=(6, 7, 8, 9, 10)) -> float:
    lo, hi = pair.gamma2
    length = hi - lo
    h = np.array([length * 2.0**-k for k in levels])
    tt = lo + h if end == 0 else hi - h
    theta, r = gamma2_to_b1_polar(pair, tt)
    vals = np.asarray(poisson_eval(data, theta, r, rtol=1e-10))
    return float(_neville_at_zero(h, vals))


def dtd_exact_profile(pair: DiscPair, v=1.0, samples: int = 401) -> DtDProfile:
    """Trace on Gamma2 of the harmonic extension of ``(0, v)`` from B1."""
    if samples < 16:
        raise ValueError("samples must be >= 16")
    data = _interface_data(pair, v)
    tt = _open_arc(pair, samples)
    theta, r = gamma2_to_b1_polar(pair, tt)
    values = np.asarray(poisson_eval(data, theta, r))
    ends = (_endpoint_limit(data, pair, 0), _endpoint_limit(data, pair, 1))
    return DtDProfile(pair, "exact", None, tt, values, r, ends)


def dtd_exact_norm(pair: DiscPair, samples: int = 64) -> float:
    """Maximum of the exact profile for ``v = 1``, the extremal datum."""
    prof = dtd_exact_profile(pair, 1.0, samples)
    return float(max(prof.values.max(), *prof.endpoint_values))


def dtd_projection_profile(pair: DiscPair, N: int, v=1.0, samples: int = 401) -> DtDProfile:
    """Trace on Gamma2 of the harmonic extension of ``P_N (0, v)``, endpoints included."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if samples < 16:
        raise ValueError("samples must be >= 16")
    coeffs = project(_interface_data(pair, v), N)
    lo, hi = pair.gamma2
    tt = np.linspace(lo, hi, samples)
    theta, r = gamma2_to_b1_polar(pair, tt)
    values = harmonic_eval(coeffs, theta, r)
    return DtDProfile(pair, "projection", N, tt, values, r, (float(values[0]), float(values[-1])))


@dataclass(frozen=True, eq=False)
class ModeVectors:
    c: np.ndarray
    s: np.ndarray


def mode_vectors(n1: int, theta: float, r: float) -> ModeVectors:
    """Vectors ``c(theta, r)`` and ``s(theta, r)`` pairing with the C and S matrices."""
    h = n1 // 2
    j = np.arange(h + 1)
    c = r**j * np.cos(j * theta)
    c[0] = 0.5
    c[h] *= 0.5
    k = np.arange(1, h)
    s = r**k * np.sin(k * theta)
    return ModeVectors(c, s)


def _node_index(n: int, theta: float, r: float) -> int | None:
    if r != 1.0:
        return None
    x = theta * n / TWO_PI
    k = round(x)
    if abs(x - k) > 1e-9:
        return None
    return k % n


def interp_row(n1: int, theta: float, r: float) -> np.ndarray:
    """``C c + S s``: weights of the nodal values in the interpolant's extension at ``(theta, r)``.

    At a node on the circle this is exactly the unit vector of that node.
    """
    k = _node_index(n1, theta, r)
    if k is not None:
        e = np.zeros(n1)
        e[k] = 1.0
        return e
    mats = interp_matrices(n1)
    mv = mode_vectors(n1, theta, r)
    return mats.C @ mv.c + mats.S @ mv.s


@dataclass(frozen=True, eq=False)
class QMask:
    n1: int
    interior_flags: np.ndarray


def _signed_index(n: int) -> np.ndarray:
    idx = np.arange(n)
    return np.where(idx > n // 2, idx - n, idx)


def q_mask(snapped: SnappedScenario) -> QMask:
    """Nodes of B1 strictly inside Gamma1; the intersection nodes are excluded."""
    _require_snapped(snapped)
    flags = np.abs(_signed_index(snapped.n1)) < snapped.ell1
    return QMask(snapped.n1, flags)


def gamma2_interior_flags(snapped: SnappedScenario) -> np.ndarray:
    """Nodes of B2 strictly inside Gamma2."""
    k = np.arange(snapped.n2)
    return (k > snapped.ell2) & (k < snapped.n2 - snapped.ell2)


def _require_snapped(snapped):
    if not isinstance(snapped, SnappedScenario):
        raise AssumptionError("interpolation analysis needs a grid-snapped scenario")


def dtd_interpolation_apply(snapped: SnappedScenario, v_samples, point) -> float:
    """``v^T Q (C c + S s)`` at a B1-polar point for nodal data supported inside Gamma1."""
    _require_snapped(snapped)
    v = np.asarray(v_samples, dtype=float)
    if v.shape != (snapped.n1,):
        raise ValueError(f"expected {snapped.n1} nodal values")
    mask = q_mask(snapped).interior_flags
    if np.any(v[~mask] != 0.0):
        raise AssumptionError("nodal data must vanish at and outside the ends of Gamma1")
    theta, r = point
    return float(v @ np.where(mask, interp_row(snapped.n1, theta, r), 0.0))


def _masked_l1(n: int, mask: np.ndarray, theta, r) -> np.ndarray:
    return np.array(
        [np.abs(interp_row(n, t, rr)[mask]).sum() for t, rr in zip(np.ravel(theta), np.ravel(r))]
    )


def _gamma2_nodes(snapped: SnappedScenario) -> np.ndarray:
    k = np.arange(snapped.ell2, snapped.n2 - snapped.ell2 + 1)
    return k * TWO_PI / snapped.n2


def _gamma1_nodes(snapped: SnappedScenario) -> np.ndarray:
    k = np.arange(-snapped.ell1, snapped.ell1 + 1)
    return k * TWO_PI / snapped.n1


def interp_bound_profile(
    snapped: SnappedScenario, samples: int = 401, grid_only: bool = False
) -> DtDProfile:
    """Masked l1 bound ``||Q (C c + S s)||_1`` along Gamma2."""
    _require_snapped(snapped)
    pair = snapped.pair
    if grid_only:
        tt = _gamma2_nodes(snapped)
        marks = np.ones(tt.size, dtype=bool)
    else:
        if samples < 16:
            raise ValueError("samples must be >= 16")
        lo, hi = pair.gamma2
        tt = np.linspace(lo, hi, samples)
        pos = tt * snapped.n2 / TWO_PI
        marks = np.abs(pos - np.round(pos)) < 1e-9
    theta, r = gamma2_to_b1_polar(pair, tt)
    values = _masked_l1(snapped.n1, q_mask(snapped).interior_flags, theta, r)
    N = snapped.n1 // 2 - 1
    return DtDProfile(
        pair, "interpolation_bound", N, tt, values, r, (float(values[0]), float(values[-1])), marks
    )


def interp_contraction_bound(snapped: SnappedScenario, side: int = 1) -> float:
    """Grid maximum of the masked l1 bound.

    ``side=1`` bounds the map from Gamma1 nodes of B1 to the Gamma2 nodes,
    ``side=2`` the analogous map from Gamma2 nodes of B2 to the Gamma1 nodes
    (evaluated in normalized B2-polar coordinates).
    """
    _require_snapped(snapped)
    if side == 1:
        return float(interp_bound_profile(snapped, grid_only=True).values.max())
    if side == 2:
        tt, rho = gamma1_to_b2_polar(snapped.pair, _gamma1_nodes(snapped))
        return float(_masked_l1(snapped.n2, gamma2_interior_flags(snapped), tt, rho).max())
    raise ValueError("side must be 1 or 2")


def interp_series_apply(snapped: SnappedScenario, v_samples, point) -> float:
    """Same map as :func:`dtd_interpolation_apply` through the interpolant's coefficients."""
    from .fourier import interpolate

    theta, r = point
    coeffs: FourierCoeffs = interpolate(v_samples)
    return float(harmonic_eval(coeffs, theta, r))
