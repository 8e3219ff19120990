"""Limit solver: closed-form intensity, Q1 integration, limiting diffusion,
conditional factor mean."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfhawkes.limits import (
    LimitCurves,
    LimitParams,
    conditional_limit_mean,
    limit_curves,
    limit_intensity,
    q1_curve,
    simulate_limit_state,
    uniform_grid,
)

from _oracles import volterra_lambda_trapezoid

TABLE_PARAMS = dict(mu=0.01, alpha=1.0, beta=1.2, a=0.5, sigma=0.5, c=-0.2,
                    x=0.5)


class TestLimitIntensity:
    def test_no_excitation_is_constant(self):
        p = LimitParams(mu=0.7, alpha=0.0, beta=1.0)
        grid = uniform_grid(2.0, 10)
        assert limit_intensity(p, grid) == pytest.approx(np.full(11, 0.7))

    def test_equal_rates_grow_linearly(self):
        p = LimitParams(mu=1.0, alpha=1.0, beta=1.0)
        grid = uniform_grid(3.0, 12)
        assert limit_intensity(p, grid) == pytest.approx(1.0 + grid, rel=1e-14)

    def test_closed_form_against_volterra_quadrature(self):
        # independent oracle: trapezoid solution of the integral equation
        grid, oracle = volterra_lambda_trapezoid(0.01, 1.0, 1.2, 1.0, dt=1e-4)
        p = LimitParams(**TABLE_PARAMS)
        exact = limit_intensity(p, grid, scheme="exact")
        assert abs(exact[-1] - 0.019063462346) <= 1e-8
        assert np.abs(exact - oracle).max() <= 1e-8

    def test_near_equal_rates_are_stable(self):
        grid = uniform_grid(1.0, 100)
        tight = limit_intensity(LimitParams(mu=1.0, alpha=1.0, beta=1.0 + 1e-13),
                                grid)
        equal = limit_intensity(LimitParams(mu=1.0, alpha=1.0, beta=1.0), grid)
        assert tight == pytest.approx(equal, rel=1e-9)

    def test_paper_euler_first_order_in_dt(self):
        # the recursion's own dt->0 limit solves lam' = alpha*lam
        p = LimitParams(mu=0.3, alpha=0.8, beta=1.1)
        ref = 0.3 * np.exp(0.8 * np.linspace(0.0, 1.0, 11))

        def gap(steps):
            grid = uniform_grid(1.0, steps)
            lam = limit_intensity(p, grid, scheme="paper_euler")
            return np.abs(lam[:: steps // 10] - ref).max()

        assert gap(100) / gap(10_000) >= 10.0

    def test_paper_euler_rejects_nonuniform_grid(self):
        p = LimitParams(mu=0.3, alpha=0.8, beta=1.1)
        with pytest.raises(ValueError, match="uniform"):
            limit_intensity(p, np.array([0.0, 0.1, 0.3]), scheme="paper_euler")

    @settings(max_examples=60, deadline=None)
    @given(mu=st.floats(0.0, 2.0), alpha=st.floats(0.0, 3.0),
           beta=st.floats(0.05, 3.0))
    def test_never_below_baseline(self, mu, alpha, beta):
        p = LimitParams(mu=mu, alpha=alpha, beta=beta)
        grid = uniform_grid(1.5, 30)
        for scheme in ("exact", "paper_euler"):
            assert np.all(limit_intensity(p, grid, scheme) >= mu - 1e-12)


class TestQ1:
    def test_zero_jump_size_keeps_initial_level(self):
        p = LimitParams(mu=0.5, alpha=0.4, beta=1.0, c=0.0, x=1.3)
        grid = uniform_grid(1.0, 50)
        lam = limit_intensity(p, grid)
        assert q1_curve(p, grid, lam) == pytest.approx(np.full(51, 1.3))

    @pytest.mark.parametrize("scheme", ["exact", "paper_euler"])
    def test_table_configuration_terminal_value(self, scheme):
        p = LimitParams(**TABLE_PARAMS)
        grid = uniform_grid(1.0, 100)
        lam = limit_intensity(p, grid, scheme)
        q1 = q1_curve(p, grid, lam, scheme)
        assert abs(q1[-1] - 0.497) <= 5e-4

    def test_poisson_mode_is_linear(self):
        p = LimitParams(mu=0.3, alpha=0.0, beta=1.0, c=-0.4, x=1.0)
        grid = uniform_grid(2.0, 40)
        lam = limit_intensity(p, grid)
        q1 = q1_curve(p, grid, lam)
        assert q1 == pytest.approx(1.0 - 0.4 * 0.3 * grid, rel=1e-12)

    def test_compound_mean_scales_drift(self):
        base = LimitParams(mu=0.3, alpha=0.5, beta=1.0, c=-0.4, x=1.0)
        marked = LimitParams(mu=0.3, alpha=0.5, beta=1.0, c=-0.2, x=1.0,
                             mean_jump_size=2.0)
        grid = uniform_grid(1.0, 20)
        lam = limit_intensity(base, grid)
        assert q1_curve(marked, grid, lam) == pytest.approx(
            q1_curve(base, grid, lam), rel=1e-14
        )

    def test_hawkes_below_poisson_benchmark_pointwise(self):
        # strictly more drawdown than the constant-intensity benchmark
        p = LimitParams(mu=0.2, alpha=1.2, beta=1.2, c=-1.0, x=1.0)
        grid = uniform_grid(1.0, 100)
        q1 = q1_curve(p, grid, limit_intensity(p, grid))
        poisson = 1.0 - 1.0 * 0.2 * grid
        assert np.all(q1[1:] < poisson[1:])
        assert q1[0] == poisson[0]

    @settings(max_examples=60, deadline=None)
    @given(mu=st.one_of(st.just(0.0), st.floats(1e-6, 2.0)),
           alpha=st.floats(0.0, 2.0),
           beta=st.floats(0.05, 3.0),
           c=st.one_of(st.just(0.0), st.floats(-2.0, -1e-6)))
    def test_never_exceeds_initial_level(self, mu, alpha, beta, c):
        p = LimitParams(mu=mu, alpha=alpha, beta=beta, c=c, x=0.8)
        grid = uniform_grid(1.0, 25)
        q1 = q1_curve(p, grid, limit_intensity(p, grid))
        assert np.all(q1 <= 0.8 + 1e-12)
        if c * mu == 0.0:
            assert q1 == pytest.approx(np.full(26, 0.8))
        else:
            assert q1[-1] < 0.8


class TestCurvesContainer:
    def test_validates_shapes_and_grid(self):
        with pytest.raises(ValueError):
            LimitCurves(np.array([0.0, 1.0]), np.ones(3), np.ones(2))
        with pytest.raises(ValueError):
            LimitCurves(np.array([0.5, 1.0]), np.ones(2), np.ones(2))


class TestLimitState:
    def test_zero_volatility_reproduces_q1_exactly(self):
        p = LimitParams(mu=0.05, alpha=1.0, beta=1.2, a=0.5, sigma=0.0,
                        c=-0.2, x=0.5)
        curves = limit_curves(p, 1.0, 100, scheme="paper_euler")
        paths = simulate_limit_state(p, curves, n_paths=3, seed=1)
        for path in paths:
            assert path == pytest.approx(curves.q1, abs=1e-14)

    def test_ensemble_mean_tracks_q1(self):
        p = LimitParams(**TABLE_PARAMS)
        curves = limit_curves(p, 1.0, 100, scheme="exact")
        paths = simulate_limit_state(p, curves, n_paths=100_000, seed=123)
        term = paths[:, -1]
        se = term.std(ddof=1) / np.sqrt(term.size)
        assert abs(term.mean() - curves.q1[-1]) <= 3.0 * se

    def test_deterministic_in_seed(self):
        p = LimitParams(**TABLE_PARAMS)
        curves = limit_curves(p, 1.0, 50, scheme="exact")
        a = simulate_limit_state(p, curves, 300, seed=9)
        b = simulate_limit_state(p, curves, 300, seed=9)
        assert np.array_equal(a, b)
        c = simulate_limit_state(p, curves, 300, seed=10)
        assert not np.array_equal(a, c)
        # block substreams: paths beyond the first block reproduce too
        d = simulate_limit_state(p, curves, 9000, seed=9)
        e = simulate_limit_state(p, curves, 9000, seed=9)
        assert np.array_equal(d, e)


class TestConditionalMean:
    def test_zero_loading_is_q1(self):
        p = LimitParams(**TABLE_PARAMS)
        curves = limit_curves(p, 1.0, 20)
        y = np.sin(curves.grid)
        assert conditional_limit_mean(p, curves, y) == pytest.approx(curves.q1)

    def test_constant_factor_is_q1(self):
        p = LimitParams(factor_loading=0.7, **TABLE_PARAMS)
        curves = limit_curves(p, 1.0, 20)
        y = np.full(21, 2.5)
        assert conditional_limit_mean(p, curves, y) == pytest.approx(curves.q1)

    def test_matches_large_network_conditional_average(self):
        # Monte Carlo oracle: bank average of a 2000-node network sharing
        # one factor path should track Q1 + loading*(Y - Y0)
        from mfhawkes.network import FactorSpec, simulate_network
        from mfhawkes.risk import mean_field_network_spec

        p = LimitParams(mu=0.05, alpha=1.0, beta=1.2, a=0.5, sigma=0.5,
                        c=-0.2, x=0.5, factor_loading=0.3)
        spec = mean_field_network_spec(p, M=2000, T=1.0, steps=100,
                                       regime="hawkes")
        spec.factor = FactorSpec(y0=0.1, drift="mean_revert", kappa=1.0,
                                 theta=0.0, vol="constant", vol_value=0.4)
        out = simulate_network(spec, 777)
        curves = limit_curves(p, 1.0, 100, scheme="exact")
        predicted = conditional_limit_mean(p, curves, out.factor_path)
        residual = out.paths.mean(axis=0) - predicted
        se = out.paths[:, -1].std(ddof=1) / np.sqrt(spec.M)
        assert abs(residual[-1]) <= 3.0 * se
        assert abs(residual[50]) <= 3.0 * se

    def test_rejects_mismatched_grid(self):
        p = LimitParams(**TABLE_PARAMS)
        curves = limit_curves(p, 1.0, 20)
        with pytest.raises(ValueError, match="grid"):
            conditional_limit_mean(p, curves, np.zeros(5))
