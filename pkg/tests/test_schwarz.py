import math

import numpy as np
import pytest

from schwarz_fourier.dtd import interp_contraction_bound
from schwarz_fourier.geometry import (
    GeometryError,
    angles_from_discs,
    auto_n2,
    contraction_exact,
    discs_from_angles,
    snap_to_grids,
)
from schwarz_fourier.schwarz import (
    InsufficientDataError,
    SchwarzConfig,
    discretization,
    laplacian_residual,
    manufactured,
    observed_rate,
    overlap_values,
    run,
    sweep,
)

SOURCE = (-1.5, 0.5)


def pair_of(m, R):
    return discs_from_angles(*angles_from_discs(m, R))


def zero(x, y):
    return np.zeros(np.shape(x))


@pytest.fixture(scope="module")
def pair():
    return pair_of(1.4, 1.2)


@pytest.fixture(scope="module")
def snapped():
    n1 = 42
    return snap_to_grids(*angles_from_discs(1.4, 1.2), n1, auto_n2(1.2, n1))


@pytest.fixture(scope="module")
def sol(pair):
    return manufactured("log_source", pair, x0=SOURCE)


@pytest.fixture(scope="module")
def exact_additive(pair, sol):
    cfg = SchwarzConfig(pair, "exact", max_sweeps=40, tol=1e-7, trace_samples=41)
    return cfg, run(cfg, sol.trace, exact=sol.evaluator)


@pytest.fixture(scope="module")
def interp_runs(snapped, sol):
    out = {}
    for mode in ("additive", "multiplicative"):
        cfg = SchwarzConfig(snapped, "interpolation", mode, max_sweeps=60, tol=1e-11)
        out[mode] = run(cfg, sol.trace, exact=sol.evaluator)
    return out


class TestConfig:
    def test_defaults(self, pair):
        cfg = SchwarzConfig(pair)
        assert (cfg.variant, cfg.mode, cfg.trace_samples) == ("exact", "additive", 101)
        assert cfg.pair is pair

    def test_snapped_pair(self, snapped):
        assert SchwarzConfig(snapped, "interpolation").pair is snapped.pair

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"variant": "spectral"},
            {"mode": "parallel"},
            {"tol": 0.0},
            {"max_sweeps": 0},
            {"trace_samples": 2},
            {"variant": "projection"},
            {"variant": "projection", "N": 0},
        ],
    )
    def test_invalid(self, pair, kwargs):
        with pytest.raises(ValueError):
            SchwarzConfig(pair, **kwargs)

    def test_interpolation_needs_snapped(self, pair):
        with pytest.raises(GeometryError):
            SchwarzConfig(pair, "interpolation")

    def test_interpolation_order_must_match_grid(self, snapped):
        assert SchwarzConfig(snapped, "interpolation", N=20).N == 20
        with pytest.raises(ValueError):
            SchwarzConfig(snapped, "interpolation", N=30)


class TestManufactured:
    def test_constant(self, pair):
        ms = manufactured("harmonic_polynomial", pair, k=0)
        assert np.all(ms.trace(np.array([0.3, -2.0]), np.array([1.0, 0.1])) == 1.0)

    def test_quadratic(self, pair):
        ms = manufactured("harmonic_polynomial", pair, k=2)
        x, y = np.array([0.3, 1.7]), np.array([-0.4, 0.2])
        assert np.allclose(ms.evaluator(x, y), x**2 - y**2, atol=1e-15)

    def test_log_source(self, sol):
        assert sol.evaluator(SOURCE[0] + 3.0, SOURCE[1] + 4.0) == pytest.approx(math.log(5.0))
        assert sol.params == {"x0": SOURCE}

    @pytest.mark.parametrize("x0", [(0.0, 0.0), (-1.05, 0.0), (1.5, 0.2)])
    def test_source_too_close(self, pair, x0):
        with pytest.raises(GeometryError):
            manufactured("log_source", pair, x0=x0)

    @pytest.mark.parametrize("kind,kwargs", [("harmonic_polynomial", {"k": 7}), ("log_source", {}), ("gaussian", {})])
    def test_bad_parameters(self, pair, kind, kwargs):
        with pytest.raises(ValueError):
            manufactured(kind, pair, **kwargs)

    def test_laplacian_residual_detects_non_harmonic(self):
        pts = np.array([[0.1, 0.2], [-0.3, 0.5]])
        assert np.allclose(laplacian_residual(lambda x, y: x**2 + y**2, pts), 4.0, atol=1e-6)


class TestSweep:
    @pytest.mark.parametrize("variant", ["exact", "projection", "interpolation"])
    def test_zero_fixed_point(self, pair, snapped, variant):
        scenario = snapped if variant == "interpolation" else pair
        cfg = SchwarzConfig(scenario, variant, N=10 if variant == "projection" else None, trace_samples=21)
        disc = discretization(cfg, zero)
        state = disc.initial()
        new = sweep(state, cfg, zero, disc)
        assert np.all(new.t1 == 0.0) and np.all(new.t2 == 0.0)

    def test_exact_contraction_per_sweep(self, pair, exact_additive):
        c1 = contraction_exact(pair.theta1_star, pair.theta2_star)
        e = exact_additive[1].errors
        assert np.all(e[1:] <= c1 * e[:-1] + 1e-3)

    def test_multiplicative_uses_fresh_iterate(self, pair, sol):
        cfg_a = SchwarzConfig(pair, "projection", "additive", N=10)
        cfg_m = SchwarzConfig(pair, "projection", "multiplicative", N=10)
        disc = discretization(cfg_a, sol.trace)
        st0 = disc.initial()
        a = sweep(st0, cfg_a, sol.trace, disc)
        m = sweep(st0, cfg_m, sol.trace, disc)
        assert np.array_equal(a.t2, m.t2)
        assert not np.allclose(a.t1, m.t1)


class TestRun:
    def test_exact_rate_and_solution(self, pair, exact_additive):
        cfg, tr = exact_additive
        c1 = contraction_exact(pair.theta1_star, pair.theta2_star)
        assert tr.converged and tr.updates[-1] <= cfg.tol
        assert observed_rate(tr) <= c1 + 0.02
        assert tr.errors[-1] < 5e-3

    def test_exact_fixed_point_consistency(self, sol, exact_additive):
        cfg, tr = exact_additive
        pts, u1, u2 = overlap_values(cfg, sol.trace, tr.state)
        assert pts.shape == (50, 2)
        assert np.max(np.abs(u1 - u2)) < 1e-5
        assert np.max(np.abs(u1 - sol.evaluator(pts[:, 0], pts[:, 1]))) < 5e-3

    def test_exact_wide_overlap_rate(self):
        pair = pair_of(2.1, 1.2)
        ms = manufactured("log_source", pair, x0=SOURCE)
        tr = run(SchwarzConfig(pair, "exact", max_sweeps=12, trace_samples=41), ms.trace, exact=ms.evaluator)
        assert observed_rate(tr) <= contraction_exact(pair.theta1_star, pair.theta2_star) + 0.02

    def test_nonconvergence_is_flagged(self, pair, sol):
        tr = run(SchwarzConfig(pair, "projection", N=10, max_sweeps=3), sol.trace)
        assert not tr.converged and tr.sweeps == 3
        assert tr.errors is None and tr.ratios.shape == (2,)

    def test_interpolation_node_errors_zero(self, interp_runs):
        for tr in interp_runs.values():
            assert tr.converged
            assert np.all(tr.node_errors == 0.0)

    def test_interpolation_rate_within_bound(self, snapped, interp_runs):
        bound = max(interp_contraction_bound(snapped, 1), interp_contraction_bound(snapped, 2))
        assert observed_rate(interp_runs["additive"]) <= bound + 0.02

    def test_multiplicative_squares_the_rate(self, interp_runs):
        add = observed_rate(interp_runs["additive"])
        assert observed_rate(interp_runs["multiplicative"]) <= add**2 + 0.05

    @pytest.mark.parametrize("variant", ["projection", "interpolation"])
    def test_updates_eventually_monotone(self, pair, snapped, sol, variant):
        scenario = snapped if variant == "interpolation" else pair
        cfg = SchwarzConfig(scenario, variant, N=20, max_sweeps=60, tol=1e-12)
        tr = run(cfg, sol.trace)
        tail = tr.updates[2:]
        assert np.all(np.diff(tail) <= 0)

    def test_projection_converges(self, pair, sol):
        tr = run(SchwarzConfig(pair, "projection", N=20, max_sweeps=60), sol.trace)
        assert tr.converged

    def test_projection_approaches_exact_solution(self, pair, sol):
        errs = []
        for N in (10, 20, 40, 80):
            cfg = SchwarzConfig(pair, "projection", N=N, max_sweeps=80, tol=1e-10)
            errs.append(run(cfg, sol.trace, exact=sol.evaluator).errors[-1])
        assert all(b < a for a, b in zip(errs, errs[1:]))
        assert errs[-1] < 1e-8


class TestObservedRate:
    def test_geometric(self):
        assert observed_rate(0.5 ** np.arange(1, 12)) == pytest.approx(0.5, rel=1e-12)

    def test_truncates_at_roundoff(self):
        e = np.concatenate([0.3 ** np.arange(1, 10), [1e-17, 3e-18]])
        assert observed_rate(e) == pytest.approx(0.3, rel=1e-12)

    @pytest.mark.parametrize("e", [np.zeros(10), [0.5, 0.25, 0.125], [0.1, 0.01, 1e-20, 1e-21, 1e-22]])
    def test_insufficient_data(self, e):
        with pytest.raises(InsufficientDataError):
            observed_rate(e)
