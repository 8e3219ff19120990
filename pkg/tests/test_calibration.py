"""Series ingestion and the bounded simplex fit of the mean-reserve curve."""

import numpy as np
import pytest

from mfhawkes.calibration import (
    ObservedSeries,
    fit_q1,
    load_series,
    q1_on_times,
)

GENERATOR = (0.3, 1300.0, 0.07, 0.11, -1.6)


def synthetic_series(n=70, params=GENERATOR):
    times = np.arange(float(n))
    return ObservedSeries(times, q1_on_times(params, times))


class TestLoadSeries:
    def test_numeric_csv(self, tmp_path):
        path = tmp_path / "series.csv"
        rows = "\n".join(f"{t},{100.0 + t}" for t in range(50))
        path.write_text("t,value\n" + rows + "\n")
        series = load_series(path)
        assert series.times.size == 50
        assert series.times[0] == 0.0
        assert series.values[-1] == 149.0

    def test_numeric_times_are_rebased(self, tmp_path):
        path = tmp_path / "series.csv"
        path.write_text(
            "t,value\n" + "\n".join(f"{t + 7},{t}" for t in range(12))
        )
        series = load_series(path)
        assert series.times[0] == 0.0 and series.times[-1] == 11.0

    def test_iso_dates_become_trading_day_offsets(self, tmp_path):
        import datetime as dt

        # 70 weekdays starting 2008-07-14
        day = dt.date(2008, 7, 14)
        rows = []
        while len(rows) < 70:
            if day.weekday() < 5:
                rows.append(f"{day.isoformat()},{1300 - len(rows)}")
            day += dt.timedelta(days=1)
        path = tmp_path / "dated.csv"
        path.write_text("date,value\n" + "\n".join(rows))
        series = load_series(path)
        assert np.array_equal(series.times, np.arange(70.0))

    def test_empty_file_is_error(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="no data"):
            load_series(path)

    def test_unparseable_row_reports_row_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,value\n0,1.0\n1,oops\n")
        with pytest.raises(ValueError, match="row 3"):
            load_series(path)

    def test_non_monotone_times_report_row_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        rows = [f"{t},{t}" for t in range(12)]
        rows[6] = "2,99"
        path.write_text("t,value\n" + "\n".join(rows))
        with pytest.raises(ValueError, match="row 8"):
            load_series(path)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError, match="10"):
            ObservedSeries(np.arange(5.0), np.ones(5))


class TestFit:
    def test_noiseless_round_trip_recovers_curve(self):
        series = synthetic_series()
        result = fit_q1(series, initial_guess=(0.2, 1250.0, 0.05, 0.2, -1.0))
        fitted = q1_on_times(result.params, series.times)
        rel_sup = np.abs(fitted - series.values).max() / np.abs(
            series.values
        ).max()
        assert rel_sup <= 1e-3
        assert result.converged

    def test_constant_series_fits_flat_curve(self):
        series = ObservedSeries(np.arange(30.0), np.full(30, 5.0))
        result = fit_q1(series, initial_guess=(0.05, 5.0, 0.01, 0.1, -0.01))
        fitted = q1_on_times(result.params, series.times)
        assert np.abs(fitted - 5.0).max() <= 1e-4
        mu, _, _, _, c = result.params
        assert abs(c * mu) <= 1e-6  # the product, not each factor, pins Q1

    def test_linear_series_reaches_tiny_sse(self):
        # x + c*mu*t is attainable in the alpha -> 0 degenerate corner
        times = np.arange(40.0)
        series = ObservedSeries(times, 2.0 - 0.03 * times)
        result = fit_q1(series, initial_guess=(0.1, 2.1, 0.05, 0.5, -0.2))
        assert result.sse <= 1e-8

    def test_sse_never_worse_than_initial_guess(self):
        series = synthetic_series(n=40)
        for guess in [(0.5, 1200.0, 0.01, 0.5, -0.5),
                      (0.01, 1400.0, 0.2, 0.05, -3.0)]:
            start = float(
                np.sum((q1_on_times(guess, series.times) - series.values) ** 2)
            )
            result = fit_q1(series, initial_guess=guess)
            assert result.sse <= start

    def test_infeasible_bounds_rejected(self):
        series = synthetic_series(n=20)
        bounds = [(0, 1), (2000.0, 1000.0), (0, 1), (0.01, 1), (-2, 0)]
        with pytest.raises(ValueError, match="infeasible"):
            fit_q1(series, initial_guess=(0.1, 1300.0, 0.1, 0.1, -1.0),
                   bounds=bounds)

    def test_initial_guess_outside_bounds_rejected(self):
        series = synthetic_series(n=20)
        bounds = [(0, 1), (0.0, 1000.0), (0, 1), (0.01, 1), (-2, 0)]
        with pytest.raises(ValueError, match="outside bounds"):
            fit_q1(series, initial_guess=(0.1, 1300.0, 0.1, 0.1, -1.0),
                   bounds=bounds)


class TestObjectiveInvariance:
    def test_half_mu_double_c_is_bitwise_identical(self):
        # scaling by a power of two commutes with rounding, so the curve and
        # hence the objective are bit-for-bit unchanged
        times = np.arange(70.0)
        mu, x, alpha, beta, c = GENERATOR
        a = q1_on_times((mu, x, alpha, beta, c), times)
        b = q1_on_times((mu / 2.0, x, alpha, beta, 2.0 * c), times)
        assert np.array_equal(a, b)

    def test_general_scaling_matches_to_machine_precision(self):
        times = np.arange(70.0)
        mu, x, alpha, beta, c = GENERATOR
        a = q1_on_times((mu, x, alpha, beta, c), times)
        k = 1.7
        b = q1_on_times((mu / k, x, alpha, beta, k * c), times)
        assert b == pytest.approx(a, rel=1e-12)
