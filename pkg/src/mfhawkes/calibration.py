"""Least-squares fit of the deterministic mean-reserve curve Q1(t)
to an observed average level series.

The objective sums squared residuals of the exact-scheme Q1 evaluated on
the observation times against the observed values, over the parameter
vector (mu, x, alpha, beta, c).  Minimization is bounded derivative-free
simplex descent with restart on stall.

Identifiability caveat: Q1 depends on the parameters only through x and
c*lam_bar(t; mu, alpha, beta), and lam_bar is linear in mu, so the scaling
(c, mu) -> (kappa*c, mu/kappa) leaves the objective exactly invariant.
Fits are therefore judged on curve recovery, not parameter recovery.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .limits import LimitParams, limit_intensity, q1_curve

__all__ = [
    "ObservedSeries",
    "CalibResult",
    "load_series",
    "fit_q1",
    "q1_on_times",
]

PARAM_NAMES = ("mu", "x", "alpha", "beta", "c")
_BETA_FLOOR = 1e-12


@dataclass
class ObservedSeries:
    """Average level per time; times strictly increasing, rebased to 0."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-d and equal length")
        if self.times.size < 10:
            raise ValueError("need at least 10 observations")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        self.times = self.times - self.times[0]


@dataclass
class CalibResult:
    """Fitted (mu, x, alpha, beta, c), objective value and optimizer status."""

    params: tuple
    sse: float
    iterations: int
    converged: bool

    def __post_init__(self):
        mu, _, alpha, beta, c = self.params
        if mu < 0 or alpha < 0 or beta <= 0 or c > 0:
            raise ValueError("fitted params violate mu,alpha>=0, beta>0, c<=0")
        if self.sse < 0:
            raise ValueError("sse must be >= 0")

    def as_limit_params(self) -> LimitParams:
        mu, x, alpha, beta, c = self.params
        return LimitParams(mu=mu, alpha=alpha, beta=beta, c=c, x=x)


def load_series(path) -> ObservedSeries:
    """Read a `t,value` or `date,value` CSV into an ObservedSeries.

    ISO dates are converted to trading-day offsets 0, 1, 2, ... in row
    order (after checking the dates increase); numeric times are rebased
    to start at 0.  Malformed rows raise with their row number.
    """
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if row_no == 1 and _looks_like_header(row):
                continue
            if len(row) < 2:
                raise ValueError(f"row {row_no}: expected two columns")
            rows.append((row_no, row[0].strip(), row[1].strip()))
    if not rows:
        raise ValueError(f"{path}: no data rows")

    times = np.empty(len(rows))
    values = np.empty(len(rows))
    dates: list[date] = []
    for k, (row_no, t_raw, v_raw) in enumerate(rows):
        try:
            values[k] = float(v_raw)
        except ValueError:
            raise ValueError(f"row {row_no}: unparseable value {v_raw!r}") from None
        try:
            times[k] = float(t_raw)
        except ValueError:
            try:
                dates.append(date.fromisoformat(t_raw))
            except ValueError:
                raise ValueError(
                    f"row {row_no}: unparseable time {t_raw!r}"
                ) from None
    if dates:
        if len(dates) != len(rows):
            raise ValueError("mix of numeric times and dates is not supported")
        for k in range(1, len(dates)):
            if dates[k] <= dates[k - 1]:
                raise ValueError(
                    f"row {rows[k][0]}: dates must be strictly increasing"
                )
        times = np.arange(len(dates), dtype=np.float64)
    else:
        for k in range(1, len(rows)):
            if times[k] <= times[k - 1]:
                raise ValueError(
                    f"row {rows[k][0]}: times must be strictly increasing"
                )
    return ObservedSeries(times, values)


def _looks_like_header(row) -> bool:
    try:
        float(row[1])
    except (ValueError, IndexError):
        return True
    return False


def q1_on_times(params, times) -> np.ndarray:
    """Exact-scheme Q1 evaluated on arbitrary strictly increasing times."""
    mu, x, alpha, beta, c = params
    p = LimitParams(mu=mu, alpha=alpha, beta=beta, c=c, x=x)
    times = np.asarray(times, dtype=np.float64)
    if times[0] != 0.0:
        raise ValueError("times must be rebased to start at 0")
    lam = limit_intensity(p, times, scheme="exact")
    return q1_curve(p, times, lam, scheme="exact")


def _sse(params, series: ObservedSeries) -> float:
    resid = q1_on_times(params, series.times) - series.values
    return float(resid @ resid)


def fit_q1(series: ObservedSeries, initial_guess, bounds=None,
           max_evals: int = 10_000) -> CalibResult:
    """Fit (mu, x, alpha, beta, c) to the series by bounded Nelder-Mead.

    Restarts the simplex from the best point whenever the optimizer stalls,
    until the improvement is negligible or ``max_evals`` objective
    evaluations are spent.  Non-convergence is reported through the
    ``converged`` flag, not as an error; infeasible bounds are an error.
    """
    x0 = np.asarray(initial_guess, dtype=np.float64)
    if x0.shape != (5,):
        raise ValueError("initial_guess must be (mu, x, alpha, beta, c)")
    if bounds is None:
        scale = max(1.0, float(np.max(np.abs(series.values))))
        bounds = [
            (0.0, 100.0),
            (-10.0 * scale, 10.0 * scale),
            (0.0, 100.0),
            (_BETA_FLOOR, 100.0),
            (-100.0, 0.0),
        ]
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    # hard model constraints: mu, alpha >= 0, beta > 0, c <= 0
    bounds[0] = (max(bounds[0][0], 0.0), bounds[0][1])
    bounds[2] = (max(bounds[2][0], 0.0), bounds[2][1])
    bounds[3] = (max(bounds[3][0], _BETA_FLOOR), bounds[3][1])
    bounds[4] = (bounds[4][0], min(bounds[4][1], 0.0))
    for (lo, hi), v, name in zip(bounds, x0, PARAM_NAMES):
        if lo > hi:
            raise ValueError(f"infeasible bounds for {name}: ({lo}, {hi})")
        if not lo <= v <= hi:
            raise ValueError(f"initial {name}={v} outside bounds ({lo}, {hi})")

    best_x = x0.copy()
    best_f = _sse(best_x, series)
    evals = 1
    iterations = 0
    converged = False
    while evals < max_evals:
        res = minimize(
            _sse, best_x, args=(series,), method="Nelder-Mead", bounds=bounds,
            options={
                "maxfev": max_evals - evals,
                "xatol": 1e-10,
                "fatol": 1e-14,
            },
        )
        evals += res.nfev
        iterations += res.nit
        improved = res.fun < best_f - 1e-14 * max(1.0, best_f)
        if res.fun < best_f:
            best_f = float(res.fun)
            best_x = np.asarray(res.x)
        if res.success and not improved:
            converged = True
            break
        if not improved:
            # stalled at the same point twice: accept as converged
            converged = bool(res.success)
            break
    params = tuple(float(v) for v in best_x)
    return CalibResult(
        params=params, sse=best_f, iterations=iterations, converged=converged
    )
