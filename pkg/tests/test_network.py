"""Finite-M network simulator: Euler scheme, jump binning, presets,
determinism and the compiled/python kernel pair."""

import numpy as np
import pytest

from mfhawkes import _kernels_py
from mfhawkes._backend import USING_COMPILED
from mfhawkes.hawkes import EventLog, HawkesSpec
from mfhawkes.limits import LimitParams, limit_curves
from mfhawkes.network import (
    BankParams,
    FactorSpec,
    JumpRegime,
    NumericalError,
    SizeDistribution,
    _binned_jumps,
    empirical_mean_path,
    monte_carlo_stats,
    scenario_preset,
    simulate_network,
    uniform_network_spec,
)
from mfhawkes.risk import mean_field_network_spec

pytestmark = pytest.mark.filterwarnings(
    "ignore::mfhawkes.hawkes.SupercriticalWarning"
)


def plain_spec(M=4, a=0.0, sigma=0.0, c_hat=0.0, rho=0.0, x0=1.0, steps=20,
               T=1.0, jump=None, **kw):
    return uniform_network_spec(
        M=M, a=a, sigma=sigma, c_hat=c_hat, rho=rho,
        jump=jump or JumpRegime(kind="none"), x0=x0, D=0.0, T=T, steps=steps,
        **kw,
    )


class TestValidation:
    def test_rho_range(self):
        with pytest.raises(ValueError, match="rho"):
            plain_spec(rho=1.5)

    def test_positive_jump_size_rejected(self):
        with pytest.raises(ValueError, match="c_hat"):
            BankParams(a=0.0, sigma=1.0, c_hat=0.1)

    def test_parameter_cap(self):
        with pytest.raises(ValueError, match="cap"):
            BankParams(a=1e7, sigma=1.0, c_hat=0.0)

    def test_hawkes_node_count_must_match(self):
        hk = HawkesSpec([1.0], [[0.1]], [1.0])
        with pytest.raises(ValueError, match="node count"):
            plain_spec(M=3, jump=JumpRegime(kind="hawkes", hawkes=hk))


class TestEulerScheme:
    def test_frozen_system_is_constant(self):
        out = simulate_network(plain_spec(), seed=1)
        assert np.array_equal(out.paths, np.ones((4, 21)))
        assert np.array_equal(out.running_min, np.ones(4))
        assert len(out.jump_log) == 0

    def test_lending_contracts_to_invariant_mean(self):
        # deterministic lending only: ensemble mean is conserved and every
        # bank approaches it monotonically
        spec = plain_spec(M=4, a=2.0, x0=[0.0, 1.0, 2.0, 3.0], steps=50)
        out = simulate_network(spec, seed=1)
        means = out.paths.mean(axis=0)
        assert means == pytest.approx(np.full(51, 1.5), rel=1e-12)
        gaps = np.abs(out.paths - 1.5)
        assert np.all(np.diff(gaps, axis=1) <= 1e-12)
        assert gaps[:, -1].max() < gaps[:, 0].max()

    def test_common_noise_with_full_correlation(self):
        # rho = 1: all banks share one Brownian path exactly
        spec = plain_spec(M=3, sigma=0.5, rho=1.0, steps=30)
        out = simulate_network(spec, seed=7)
        assert out.paths[0] == pytest.approx(out.paths[1], abs=1e-15)
        assert out.paths[0] == pytest.approx(out.paths[2], abs=1e-15)

    def test_nonfinite_raises_with_step_index(self):
        spec = plain_spec(M=2, a=1e6, sigma=1.0, x0=[0.0, 1.0], steps=100)
        with pytest.raises(NumericalError) as err:
            simulate_network(spec, seed=3)
        assert 0 < err.value.step <= 100

    def test_martingale_mean_without_jumps(self):
        # equal lending rates cancel in the average: zero drift in Xbar
        spec = plain_spec(M=10, a=0.7, sigma=1.0, rho=0.3, x0=0.5, steps=50)
        stats = monte_carlo_stats(spec, 10_000, 601, 0.0, workers=2)
        drift = stats.mean_paths[:, -1] - stats.mean_paths[:, 0]
        se = drift.std(ddof=1) / np.sqrt(drift.size)
        assert abs(drift.mean()) <= 3.0 * se


class TestJumps:
    def test_end_of_step_binning(self):
        spec = plain_spec(M=2, steps=10, T=1.0)
        log = EventLog([0.05, 0.10, 0.1000001, 1.0], [0, 1, 0, 1], horizon=1.0)
        inc = _binned_jumps(spec, log, np.ones(4), spec.grid)
        assert inc[0, 0] == 1.0  # t in (0, 0.1]
        assert inc[0, 1] == 1.0  # exactly at the right edge stays in step 0
        assert inc[1, 0] == 1.0  # just past the edge falls into step 1
        assert inc[9, 1] == 1.0  # horizon lands in the final step
        assert inc.sum() == 4.0

    def test_jump_size_applies_per_event(self):
        hk = HawkesSpec([5.0, 5.0], np.zeros((2, 2)), [1.0, 1.0])
        spec = plain_spec(M=2, c_hat=-0.3,
                          jump=JumpRegime(kind="hawkes", hawkes=hk))
        out = simulate_network(spec, seed=21)
        counts = np.bincount(out.jump_log.nodes, minlength=2)
        assert out.paths[:, -1] == pytest.approx(1.0 - 0.3 * counts, rel=1e-12)

    def test_compound_point_mass_equals_scaled_jump(self):
        # a point mass of 2 on the marks consumes no extra randomness, so it
        # must match doubling c_hat draw for draw
        hk = HawkesSpec([2.0, 2.0], np.full((2, 2), 0.2), [1.0, 1.0])
        plain = plain_spec(M=2, c_hat=-0.4,
                           jump=JumpRegime(kind="hawkes", hawkes=hk))
        marked = plain_spec(
            M=2, c_hat=-0.2,
            jump=JumpRegime(kind="compound_hawkes", hawkes=hk,
                            size=SizeDistribution(kind="point", value=2.0)),
        )
        a = simulate_network(plain, seed=5)
        b = simulate_network(marked, seed=5)
        assert np.array_equal(a.paths, b.paths)

    def test_lognormal_mark_mean(self):
        dist = SizeDistribution(kind="lognormal", m=0.2, s=0.5)
        rng = np.random.default_rng(0)
        sample = dist.sample(rng, 200_000)
        se = sample.std(ddof=1) / np.sqrt(sample.size)
        assert abs(sample.mean() - dist.mean()) <= 3.0 * se

    def test_poisson_regime_event_rate(self):
        spec = plain_spec(M=3, jump=JumpRegime(kind="poisson", rate=2.0), T=2.0)
        n = 2000
        totals = np.empty(n)
        for j in range(n):
            out = simulate_network(
                spec, np.random.SeedSequence(entropy=31, spawn_key=(j,))
            )
            totals[j] = len(out.jump_log)
        se = totals.std(ddof=1) / np.sqrt(n)
        assert abs(totals.mean() - 12.0) <= 3.0 * se  # 3 nodes * rate 2 * T 2


class TestFactor:
    def test_zero_loading_leaves_paths_unchanged(self):
        fac = FactorSpec(y0=0.0, drift="constant", drift_value=1.0,
                         vol="constant", vol_value=0.5)
        base = plain_spec(M=3, sigma=0.4, steps=25)
        with_factor = plain_spec(M=3, sigma=0.4, steps=25, factor=fac)
        a = simulate_network(base, seed=17)
        b = simulate_network(with_factor, seed=17)
        assert np.array_equal(a.paths, b.paths)
        assert b.factor_path is not None and b.factor_path[0] == 0.0

    def test_loading_shifts_by_factor_increment(self):
        fac = FactorSpec(y0=1.0, drift="constant", drift_value=2.0,
                         vol="constant", vol_value=0.0)
        spec = plain_spec(M=2, steps=10, factor=fac, factor_loading=0.5)
        out = simulate_network(spec, seed=2)
        assert out.factor_path == pytest.approx(1.0 + 2.0 * spec.grid, rel=1e-12)
        assert out.paths[0] == pytest.approx(1.0 + 0.5 * 2.0 * spec.grid,
                                             rel=1e-12)


class TestDeterminism:
    def test_same_seed_bit_identical(self):
        spec = scenario_preset("lending_correlated_hawkes")
        a = simulate_network(spec, seed=5)
        b = simulate_network(spec, seed=5)
        assert np.array_equal(a.paths, b.paths)
        assert np.array_equal(a.jump_log.times, b.jump_log.times)

    def test_worker_count_invariance(self):
        p = LimitParams(mu=0.05, alpha=1.0, beta=1.2, a=0.5, sigma=0.5,
                        c=-0.2, x=0.5)
        spec = mean_field_network_spec(p, M=40, T=1.0, steps=50)
        s1 = monte_carlo_stats(spec, 120, 7, 0.0, workers=1)
        s2 = monte_carlo_stats(spec, 120, 7, 0.0, workers=2)
        assert np.array_equal(s1.mean_paths, s2.mean_paths)
        assert np.array_equal(s1.default_fracs, s2.default_fracs)
        assert np.array_equal(s1.terminal_delta, s2.terminal_delta)


class TestKernelBackends:
    def test_python_kernel_matches_compiled(self):
        if not USING_COMPILED:
            pytest.skip("compiled extension not built")
        from mfhawkes import _kernels

        rng = np.random.default_rng(0)
        x0 = rng.normal(size=50)
        a = rng.uniform(0.0, 2.0, 50)
        drive = rng.normal(scale=0.05, size=(16, 120, 50))
        pc = _kernels.step_network_batch(x0, a, 0.01, drive)
        pp = _kernels_py.step_network_batch(x0, a, 0.01, drive)
        assert np.abs(pc - pp).max() <= 1e-12

    def test_python_kernel_shape_checks(self):
        with pytest.raises(ValueError):
            _kernels_py.step_network_batch(np.zeros(3), np.zeros(2), 0.1,
                                           np.zeros((1, 4, 3)))


class TestMeanPathAndStats:
    def test_single_bank_mean_is_the_path(self):
        spec = plain_spec(M=1, sigma=0.5)
        out = simulate_network(spec, seed=9)
        assert np.array_equal(empirical_mean_path(out), out.paths[0])

    def test_constant_paths_mean(self):
        out = simulate_network(plain_spec(x0=0.7), seed=1)
        assert empirical_mean_path(out) == pytest.approx(np.full(21, 0.7))

    def test_terminal_mean_matches_limit_curve(self):
        # small network, many runs: mean terminal reserve near Q1(T)
        p = LimitParams(mu=0.05, alpha=1.0, beta=1.2, a=0.5, sigma=0.5,
                        c=-0.2, x=0.5)
        spec = mean_field_network_spec(p, M=50, T=1.0, steps=100)
        stats = monte_carlo_stats(spec, 2000, 71, 0.0, workers=2)
        curves = limit_curves(p, 1.0, 100, scheme="exact")
        term = stats.mean_paths[:, -1]
        se = term.std(ddof=1) / np.sqrt(term.size)
        assert abs(term.mean() - curves.q1[-1]) <= 3.0 * se


class TestStepRefinement:
    def test_halving_dt_changes_sr_less_than_mc_error(self):
        # Common-random-number refinement: the fine grid reuses the coarse
        # Brownian path (pairwise increment sums) and the same event times,
        # and the running minimum is monitored on the shared coarse grid so
        # the monitoring effect cancels; what remains is pure scheme error.
        from mfhawkes._backend import step_network_batch
        from mfhawkes.hawkes import simulate_hawkes

        p = LimitParams(mu=0.01, alpha=1.0, beta=1.2, a=0.5, sigma=0.5,
                        c=-0.2, x=0.5)
        spec = mean_field_network_spec(p, M=300, T=1.0, steps=100,
                                       regime="hawkes")
        M, T = spec.M, spec.T
        steps_c, steps_f = 100, 200
        dt_c, dt_f = T / steps_c, T / steps_f
        a = spec.bank_array("a")
        sig = spec.bank_array("sigma")
        c_hat = spec.bank_array("c_hat")
        grid_c = np.linspace(0.0, T, steps_c + 1)
        grid_f = np.linspace(0.0, T, steps_f + 1)

        n = 2000
        frac_c = np.empty(n)
        frac_f = np.empty(n)
        for j in range(n):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=909, spawn_key=(j,))
            )
            log = simulate_hawkes(spec.jump.hawkes, T, rng)
            inc_f = rng.standard_normal((steps_f, M)) * (sig * np.sqrt(dt_f))
            inc_c = inc_f[0::2] + inc_f[1::2]
            bin_f = np.zeros((steps_f, M))
            bin_c = np.zeros((steps_c, M))
            if len(log):
                kf = np.searchsorted(grid_f, log.times, side="left") - 1
                kc = np.searchsorted(grid_c, log.times, side="left") - 1
                np.add.at(bin_f, (kf, log.nodes), 1.0)
                np.add.at(bin_c, (kc, log.nodes), 1.0)
            path_f = step_network_batch(spec.x0, a, dt_f,
                                        (inc_f + c_hat * bin_f)[None])[0]
            path_c = step_network_batch(spec.x0, a, dt_c,
                                        (inc_c + c_hat * bin_c)[None])[0]
            frac_f[j] = np.count_nonzero(path_f[0::2].min(axis=0) <= 0.0) / M
            frac_c[j] = np.count_nonzero(path_c.min(axis=0) <= 0.0) / M
        se = frac_c.std(ddof=1) / np.sqrt(n)
        assert abs(frac_f.mean() - frac_c.mean()) < se


class TestScenarioPresets:
    def test_unknown_name_lists_valid_ones(self):
        with pytest.raises(ValueError, match="no_lending_independent"):
            scenario_preset("bogus")

    def test_hawkes_scenario_parameters(self):
        spec = scenario_preset("lending_correlated_hawkes")
        assert spec.M == 10 and spec.T == 1.0 and spec.steps == 100
        assert spec.rho == 0.2 and spec.D == -0.7
        bank = spec.banks[0]
        assert (bank.a, bank.sigma, bank.c_hat) == (10.0, 1.0, -0.2)
        hk = spec.jump.hawkes
        assert hk.mu == pytest.approx(np.full(10, 1.0))
        assert hk.alpha == pytest.approx(np.full((10, 10), 0.2))
        assert hk.beta == pytest.approx(np.full(10, 0.2))
        assert np.all(spec.x0 == 0.0)

    def test_first_row_parameters(self):
        spec = scenario_preset("no_lending_independent")
        bank = spec.banks[0]
        assert (bank.a, bank.sigma, bank.c_hat) == (0.0, 1.0, 0.0)
        assert spec.rho == 0.2
        assert spec.jump.kind == "none"

    def test_poisson_scenario_rate(self):
        spec = scenario_preset("lending_correlated_poisson")
        assert spec.jump.kind == "poisson"
        assert spec.jump.rate == pytest.approx(1.0)
