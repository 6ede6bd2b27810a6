"""Named invariant checks, grouped in suites, used by the ``verify`` subcommand.

Checks reach the library through module attributes (``fourier.interpolate``
rather than a bound import) so that a patched implementation is what gets
checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import dtd, fourier, geometry, kernels, schwarz

SUITES = ("kernels", "fourier", "dtd", "schwarz")

EXAMPLE_DISCS = ((1.4, 1.2), (2.1, 1.2), (0.75, 1.7))


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    ok: bool
    detail: str


_REGISTRY: dict[str, list[tuple[str, Callable]]] = {s: [] for s in SUITES}


def check(suite: str, name: str):
    def deco(fn):
        _REGISTRY[suite].append((name, fn))
        return fn

    return deco


def _within(value: float, limit: float, what: str = "max deviation") -> tuple[bool, str]:
    return value <= limit, f"{what} {value:.3g} (limit {limit:g})"


def _pair(m, R):
    return geometry.discs_from_angles(*geometry.angles_from_discs(m, R))


# kernels -------------------------------------------------------------------


@check("kernels", "kernel normalization")
def _kernel_normalization(rng):
    x, w = fourier.panel_nodes(np.linspace(0.0, geometry.TWO_PI, 65), 24)
    worst = 0.0
    for r in (0.0, 0.3, 0.7, 0.95):
        worst = max(worst, abs(np.sum(w * kernels.poisson_kernel(x, r)) / geometry.TWO_PI - 1))
        for N in (1, 5, 20, 80):
            val = np.sum(w * kernels.truncated_kernel(N, x, r)) / geometry.TWO_PI
            worst = max(worst, abs(val - 1.0))
    return _within(worst, 1e-12)


@check("kernels", "closed form equals partial sum")
def _closed_form(rng):
    psi = np.linspace(-math.pi, math.pi, 201)
    worst = 0.0
    for N in (1, 4, 10, 25, 60):
        for r in (0.1, 0.5, 0.8, 0.95):
            diff = kernels.truncated_kernel(N, psi, r) - kernels.truncated_kernel_closed(N, psi, r)
            worst = max(worst, float(np.max(np.abs(diff))))
    return _within(worst, 1e-11)


@check("kernels", "K_N nonnegative below r_N*")
def _positivity(rng):
    worst = math.inf
    for N in range(4, 101, 8):
        rs = kernels.positivity_radius_theory(N)
        grid = kernels.kernel_grid(N, np.linspace(0, geometry.TWO_PI, 4 * N), np.linspace(0, rs, 100))
        worst = min(worst, float(grid.min()))
    return worst >= 0.0, f"min K_N {worst:.3g}"


@check("kernels", "numerical distance below theoretical distance")
def _q_le_one(rng):
    qs = [kernels.positivity_radius_numeric(N).q for N in (4, 5, 10, 20, 40, 80, 100)]
    return max(qs) <= 1.0, f"max q {max(qs):.4f}"


@check("kernels", "epsilon quadrature equals tail series")
def _epsilon_series(rng):
    worst = 0.0
    for N in (5, 10, 20, 30, 40, 60, 80):
        rs = kernels.positivity_radius_theory(N)
        q = kernels.epsilon_quadrature(N, rs)
        worst = max(worst, abs(q - kernels.epsilon_series(N, rs)) / q)
    return _within(worst, 1e-10, "max relative deviation")


@check("kernels", "epsilon below closed-form bound")
def _epsilon_bound(rng):
    gaps = []
    for N in range(4, 101):
        rs = kernels.positivity_radius_theory(N)
        gaps.append(kernels.epsilon_bound(N) - kernels.epsilon_quadrature(N, rs))
    return min(gaps) >= 0, f"min margin {min(gaps):.3g}"


@check("kernels", "Lambert W defining equation")
def _lambert(rng):
    worst = 0.0
    for z in np.concatenate([[1e-8, 0.5, 1.0, math.e], np.geomspace(3, 1e6, 40)]):
        w = kernels.lambert_w(z)
        worst = max(worst, abs(w * math.exp(w) - z) / z)
    return _within(worst, 1e-12, "max relative residual")


@check("kernels", "Hoorfar sandwich")
def _hoorfar(rng):
    bad = []
    for z in (math.e, 10.0, 100.0, 1e4):
        lo, hi = kernels.hoorfar_bounds(z)
        if not lo <= kernels.lambert_w(z) <= hi:
            bad.append(z)
    return not bad, "z in {e, 10, 100, 1e4}" if not bad else f"fails at z={bad}"


@check("kernels", "positivity inequality chain")
def _inequality(rng):
    bad = [N for N in range(4, 101) if not kernels.verify_positivity_inequality(N).ok]
    return not bad, "all N in 4..100" if not bad else f"fails for N={bad[:5]}"


# fourier -------------------------------------------------------------------


def _random_trig(rng, degree):
    a = rng.normal(size=degree + 1)
    b = rng.normal(size=degree)
    return fourier.FourierCoeffs(2 * a[0], a[1:], b)


@check("fourier", "projection reproduces single modes")
def _project_modes(rng):
    worst = 0.0
    N = 12
    for k in range(N + 1):
        c = fourier.project(fourier.BoundaryFn.smooth(lambda t, k=k: np.cos(k * t)), N)
        expected = np.zeros(2 * N + 1)
        expected[k] = 2.0 if k == 0 else 1.0
        worst = max(worst, float(np.max(np.abs(c.as_vector() - expected))))
    c = fourier.project(fourier.BoundaryFn.smooth(lambda t: np.sin((N + 1) * t)), N)
    worst = max(worst, float(np.max(np.abs(c.as_vector()))))
    return _within(worst, 1e-12)


@check("fourier", "projection of an arc indicator")
def _project_indicator(rng):
    ts = 0.9
    c = fourier.project(fourier.BoundaryFn.indicator(-ts, ts), 30)
    n = np.arange(1, 31)
    worst = max(
        abs(0.5 * c.a0 - ts / math.pi),
        float(np.max(np.abs(c.a - 2 * np.sin(n * ts) / (n * math.pi)))),
        float(np.max(np.abs(c.b))),
    )
    return _within(worst, 1e-12)


@check("fourier", "projection idempotence")
def _idempotence(rng):
    c = fourier.project(fourier.BoundaryFn.indicator(-1.0, 1.3), 20)
    again = fourier.project(fourier.BoundaryFn.smooth(lambda t: fourier.harmonic_eval(c, t, 1.0)), 20)
    return _within(float(np.max(np.abs(again.as_vector() - c.as_vector()))), 1e-12)


@check("fourier", "interpolation nodal exactness")
def _nodal(rng):
    worst = 0.0
    for i in range(20):
        n1 = int(rng.integers(3, 40)) * 2
        shift, amp = rng.uniform(0, 6), rng.normal(size=3)

        def g(t):
            return amp[0] * np.abs(np.sin(t - shift)) + amp[1] * np.cos(3 * t) + amp[2] * np.exp(np.sin(t))

        x = fourier.nodes(n1)
        c = fourier.interpolate(g(x))
        worst = max(worst, float(np.max(np.abs(fourier.harmonic_eval(c, x, 1.0) - g(x)))))
    return _within(worst, 1e-10)


@check("fourier", "matrix and FFT interpolation agree")
def _fft(rng):
    worst = 0.0
    for n1 in (6, 10, 42, 98, 256):
        w = rng.normal(size=n1)
        a = fourier.interpolate(w, "matrix").as_vector()
        b = fourier.interpolate(w, "fft").as_vector()
        worst = max(worst, float(np.max(np.abs(a - b))))
    return _within(worst, 1e-10)


@check("fourier", "Nyquist mode reproduction")
def _nyquist(rng):
    worst = 0.0
    for n1 in (6, 20, 42):
        h = n1 // 2
        x = fourier.nodes(n1)
        c = fourier.interpolate(np.cos(h * x))
        worst = max(worst, abs(c.nyquist - 2.0), float(np.max(np.abs(c.a))), float(np.max(np.abs(c.b))))
        t = rng.uniform(0, geometry.TWO_PI, 30)
        r = rng.uniform(0, 1, 30)
        worst = max(worst, float(np.max(np.abs(fourier.harmonic_eval(c, t, r) - r**h * np.cos(h * t)))))
        const = fourier.interpolate(np.ones(n1))
        worst = max(worst, abs(const.a0 - 2.0), abs(const.nyquist))
    return _within(worst, 1e-10)


@check("fourier", "projected extension equals truncated-kernel integral")
def _shift(rng):
    g = fourier.BoundaryFn((-0.7, 1.1), (lambda t: np.cos(2 * t) + t, -0.5))
    N = 15
    c = fourier.project(g, N)
    edges = np.concatenate([np.linspace(-0.7, 1.1, 9), np.linspace(1.1, 2 * math.pi - 0.7, 25)[1:]])
    x, w = fourier.panel_nodes(edges, 30)
    gx = g(x)
    worst = 0.0
    for th, r in zip(rng.uniform(0, 6.28, 20), rng.uniform(0, 1, 20)):
        direct = np.sum(w * kernels.truncated_kernel(N, th - x, r) * gx) / geometry.TWO_PI
        worst = max(worst, abs(direct - fourier.harmonic_eval(c, th, r)))
    return _within(worst, 1e-8)


@check("fourier", "mean value property")
def _mean(rng):
    c = _random_trig(rng, 8)
    return _within(abs(fourier.harmonic_eval(c, 1.234, 0.0) - 0.5 * c.a0), 0.0)


@check("fourier", "arc values of the indicator extension")
def _arc(rng):
    worst = 0.0
    for ts, tt in ((0.997, 2.37), (0.5, 1.5), (2.0, 2.8)):
        pair = geometry.discs_from_angles(ts, tt)
        lo, hi = pair.gamma2
        theta, r = geometry.gamma2_to_b1_polar(pair, np.linspace(lo, hi, 22)[1:-1])
        vals = fourier.poisson_eval(fourier.BoundaryFn.indicator(-ts, ts), theta, r)
        worst = max(worst, float(np.max(np.abs(vals - fourier.arc_value_oracle(ts, tt)))))
    return _within(worst, 1e-6)


@check("fourier", "curve limits at a jump")
def _curve(rng):
    g = fourier.BoundaryFn.indicator(0.0, math.pi)
    worst = max(fourier.curve_limit_verify(g, s) for s in (-2, -1, 0, 1, 2))
    return _within(worst, 1e-2)


@check("fourier", "partial sums at a jump tend to the mean of the limits")
def _gibbs_mid(rng):
    ts = 1.0
    g = fourier.BoundaryFn.indicator(-ts, ts)
    worst = max(abs(fourier.harmonic_eval(fourier.project(g, N), ts, 1.0) - 0.5) for N in (40, 60, 80))
    return _within(worst, 0.05)


@check("fourier", "Lebesgue constants increase")
def _lebesgue(rng):
    L = [fourier.lebesgue_constant(N) for N in range(1, 201)]
    ok = L[0] >= 1.0 and all(b > a for a, b in zip(L, L[1:]))
    return ok, f"L_1={L[0]:.4f}, L_200={L[-1]:.4f}"


# dtd -----------------------------------------------------------------------


@check("dtd", "exact profile constant for unit data")
def _exact_const(rng):
    worst = 0.0
    for m, R in EXAMPLE_DISCS:
        prof = dtd.dtd_exact_profile(_pair(m, R), 1.0, 64)
        worst = max(worst, float(np.ptp(prof.values)))
    return _within(worst, 1e-4, "max spread")


@check("dtd", "exact norm equals arc contraction constant")
def _exact_norm(rng):
    worst = 0.0
    for m, R in EXAMPLE_DISCS:
        pair = _pair(m, R)
        c1 = geometry.contraction_exact(pair.theta1_star, pair.theta2_star)
        worst = max(worst, abs(dtd.dtd_exact_norm(pair) - c1))
    return _within(worst, 1e-4)


def _random_interface_data(rng, pair):
    c = _random_trig(rng, 6)

    def v(t):
        return fourier.harmonic_eval(c, t, 1.0)

    scale = np.max(np.abs(v(np.linspace(-pair.theta1_star, pair.theta1_star, 2001))))
    return lambda t: v(t) / scale


@check("dtd", "maximum-principle domination in the positive region")
def _domination(rng):
    pair = _pair(1.4, 1.2)
    N = 25
    ref = dtd.dtd_projection_profile(pair, N, 1.0, 101)
    mask = ref.in_positive_region()
    worst = -math.inf
    for _ in range(10):
        prof = dtd.dtd_projection_profile(pair, N, _random_interface_data(rng, pair), 101)
        worst = max(worst, float(np.max(np.abs(prof.values[mask]) - ref.values[mask])))
    return worst <= 1e-8, f"max excess {worst:.3g}"


@check("dtd", "epsilon correction bound")
def _eps_bound(rng):
    worst = -math.inf
    for m, R in EXAMPLE_DISCS[:2]:
        pair = _pair(m, R)
        c1 = geometry.contraction_exact(pair.theta1_star, pair.theta2_star)
        for N in (10, 25, 40, 80):
            prof = dtd.dtd_projection_profile(pair, N, 1.0, 201)
            mask = prof.in_positive_region()
            if mask.any():
                eps = kernels.epsilon_quadrature(N, kernels.positivity_radius_theory(N))
                worst = max(worst, float(prof.values[mask].max() - (c1 + eps)))
    return worst <= 1e-6, f"max excess {worst:.3g}"


def _snapped(m, R, N):
    n1 = 2 * (N + 1)
    return geometry.snap_to_grids(*geometry.angles_from_discs(m, R), n1, geometry.auto_n2(R, n1))


def _random_point_in_b1(rng):
    return rng.uniform(0, geometry.TWO_PI), math.sqrt(rng.uniform(0, 1))


@check("dtd", "l1 bound attained by the sign vector")
def _duality(rng):
    worst = 0.0
    for m, R, N in ((1.4, 1.2, 20), (0.75, 1.7, 40)):
        sc = _snapped(m, R, N)
        mask = dtd.q_mask(sc).interior_flags
        prof = dtd.interp_bound_profile(sc, 41)
        for theta, r, bound in zip(*geometry.gamma2_to_b1_polar(sc.pair, prof.thetas), prof.values):
            row = dtd.interp_row(sc.n1, theta, r)
            v = np.where(mask, np.sign(row), 0.0)
            worst = max(worst, abs(dtd.dtd_interpolation_apply(sc, v, (theta, r)) - bound))
    return _within(worst, 1e-12)


@check("dtd", "interpolation two-path equality")
def _two_path(rng):
    sc = _snapped(1.4, 1.2, 20)
    mask = dtd.q_mask(sc).interior_flags
    worst = 0.0
    for _ in range(100):
        v = np.where(mask, rng.normal(size=sc.n1), 0.0)
        point = _random_point_in_b1(rng)
        a = dtd.dtd_interpolation_apply(sc, v, point)
        b = dtd.interp_series_apply(sc, v, point)
        worst = max(worst, abs(a - b))
    return _within(worst, 1e-10)


@check("dtd", "mode vectors reproduce pure modes")
def _pure_modes(rng):
    n1 = 20
    x = fourier.nodes(n1)
    worst = 0.0
    for j in range(n1 // 2 + 1):
        for fn in (np.cos, np.sin):
            if fn is np.sin and j in (0, n1 // 2):
                continue
            theta, r = _random_point_in_b1(rng)
            val = dtd.interp_row(n1, theta, r) @ fn(j * x)
            worst = max(worst, abs(val - r**j * fn(j * theta)))
    return _within(worst, 1e-10)


@check("dtd", "interpolation bound vanishes at the intersection points")
def _endpoint_zero(rng):
    vals = []
    for m, R, N in ((1.4, 1.2, 20), (2.1, 1.2, 40), (0.75, 1.7, 40)):
        prof = dtd.interp_bound_profile(_snapped(m, R, N), 41)
        vals.extend(prof.endpoint_values)
    return max(vals) == 0.0, f"endpoint values {max(vals):.3g}"


@check("dtd", "grid values free of oscillation spikes")
def _no_spikes(rng):
    worst = -math.inf
    for N in (20, 40):
        sc = _snapped(0.75, 1.7, N)
        plateau = (sc.theta2_int - sc.theta1_int) / math.pi
        prof = dtd.interp_bound_profile(sc, grid_only=True)
        worst = max(worst, float(prof.values.max() - plateau))
    return worst <= 0.05, f"max excess over plateau {worst:.3g}"


# schwarz -------------------------------------------------------------------


def _log_solution(pair):
    return schwarz.manufactured("log_source", pair, x0=(-1.5, 0.5))


@check("schwarz", "zero data is a fixed point")
def _zero_fixed(rng):
    pair = _pair(1.4, 1.2)
    cfg = schwarz.SchwarzConfig(pair, "projection", N=10)
    zero = lambda x, y: np.zeros(np.shape(x))  # noqa: E731
    disc = schwarz.discretization(cfg, zero)
    st = disc.initial()
    new = schwarz.sweep(st, cfg, zero, disc)
    change = max(np.max(np.abs(new.t1)), np.max(np.abs(new.t2)), np.max(np.abs(new.u1.as_vector())))
    return _within(float(change), 0.0, "max change")


@check("schwarz", "exact sweeps contract by the arc constant")
def _exact_contraction(rng):
    pair = _pair(1.4, 1.2)
    ms = _log_solution(pair)
    c1 = geometry.contraction_exact(pair.theta1_star, pair.theta2_star)
    cfg = schwarz.SchwarzConfig(pair, "exact", max_sweeps=8, trace_samples=41)
    tr = schwarz.run(cfg, ms.trace, exact=ms.evaluator)
    e = tr.errors
    worst = float(np.max(e[1:] - (c1 * e[:-1] + 1e-3)))
    return worst <= 0.0, f"max excess {worst:.3g}"


@check("schwarz", "intersection-node errors vanish for interpolation")
def _node_zero(rng):
    worst = 0.0
    for mode in schwarz.MODES:
        sc = _snapped(1.4, 1.2, 20)
        ms = _log_solution(sc.pair)
        tr = schwarz.run(schwarz.SchwarzConfig(sc, "interpolation", mode), ms.trace, exact=ms.evaluator)
        worst = max(worst, float(tr.node_errors.max()))
    return worst == 0.0, f"max node error {worst:.3g}"


@check("schwarz", "multiplicative rate below squared additive rate")
def _mult_vs_add(rng):
    worst = -math.inf
    for m, R in EXAMPLE_DISCS[:2]:
        sc = _snapped(m, R, 20)
        ms = _log_solution(sc.pair)
        rates = {}
        for mode in schwarz.MODES:
            cfg = schwarz.SchwarzConfig(sc, "interpolation", mode, tol=1e-11, max_sweeps=400)
            rates[mode] = schwarz.observed_rate(schwarz.run(cfg, ms.trace))
        worst = max(worst, rates["multiplicative"] - rates["additive"] ** 2)
    return worst <= 0.05, f"max excess {worst:.3g}"


@check("schwarz", "projection fixed points approach the solution")
def _variant_consistency(rng):
    pair = _pair(1.4, 1.2)
    ms = _log_solution(pair)
    errs = []
    for N in (10, 20, 40):
        cfg = schwarz.SchwarzConfig(pair, "projection", N=N, tol=1e-10)
        tr = schwarz.run(cfg, ms.trace)
        x, y = schwarz.discretization(cfg, ms.trace).points2()
        theta, r = geometry.gamma2_to_b1_polar(pair, tr.samples[1])
        mask = r <= kernels.positivity_radius_theory(N)
        errs.append(float(np.max(np.abs(tr.state.t2 - ms.evaluator(x, y))[mask])))
    ok = all(b < a for a, b in zip(errs, errs[1:]))
    return ok, "errors " + ", ".join(f"{e:.2e}" for e in errs)


def run_suite(suite: str = "all", seed: int = 0) -> list[CheckResult]:
    names = SUITES if suite == "all" else (suite,)
    if any(n not in SUITES for n in names):
        raise ValueError(f"unknown suite {suite!r}")
    results = []
    for s in names:
        for name, fn in _REGISTRY[s]:
            rng = np.random.default_rng(seed)
            try:
                ok, detail = fn(rng)
            except Exception as exc:  # a crashing check is a failed check
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            results.append(CheckResult(s, name, bool(ok), detail))
    return results
