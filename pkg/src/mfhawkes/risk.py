"""Systemic-risk indicators, default-count distributions, tail dependence
and the root-M fluctuation-scaling experiment.

Two arms are kept comparable by construction: the Monte Carlo indicators
evaluate running minima on the discrete Euler grid, and so does the
law-of-large-numbers arm on the simulated limiting diffusion, so the grid
monitoring bias cancels in comparisons (it remains a known bias for
absolute values; no Brownian-bridge correction is applied).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .limits import LimitCurves, LimitParams, limit_curves
from .network import (
    JumpRegime,
    NetworkSpec,
    RunStats,
    SimOutput,
    SizeDistribution,
    mean_field_hawkes_spec,
    monte_carlo_stats,
    uniform_network_spec,
)

__all__ = [
    "RiskReport",
    "pmf_from_counts",
    "DependenceCurve",
    "sr_mc",
    "add_mc",
    "sr_lln",
    "add_lln",
    "default_count_distribution",
    "tail_dependence",
    "fluctuation_scaling",
    "mc_risk_report",
    "mean_field_network_spec",
    "run_stats_from_outputs",
]


@dataclass
class RiskReport:
    """SR and ADD estimates with Monte Carlo standard errors."""

    sr: float
    sr_se: float
    add: np.ndarray  # per-grid-point cross-sectional mean, averaged over runs
    add_se: float  # standard error of the terminal ADD value
    grid: np.ndarray
    n_runs: int
    fingerprint: str = ""

    def __post_init__(self):
        if not 0.0 <= self.sr <= 1.0:
            raise ValueError("sr must lie in [0, 1]")
        if self.sr_se < 0:
            raise ValueError("sr_se must be >= 0")

    @property
    def add_terminal(self) -> float:
        return float(self.add[-1])

    def summary(self) -> str:
        lines = [
            f"systemic risk SR = {self.sr:.4f} +- {self.sr_se:.4f}",
            f"distance to default ADD(T) = {self.add_terminal:.4f} "
            f"+- {self.add_se:.4f}",
            f"runs = {self.n_runs}",
        ]
        if self.fingerprint:
            lines.append(f"config fingerprint = {self.fingerprint}")
        return "\n".join(lines)


@dataclass
class DependenceCurve:
    """Conditional exceedance probabilities p(q) on a quantile grid."""

    q_grid: np.ndarray
    p_of_q: np.ndarray
    tail: str = "upper"
    note: str = ""

    def __post_init__(self):
        self.q_grid = np.asarray(self.q_grid, dtype=np.float64)
        self.p_of_q = np.asarray(self.p_of_q, dtype=np.float64)
        if self.q_grid.shape != self.p_of_q.shape:
            raise ValueError("q_grid and p_of_q must have equal length")
        if np.any((self.p_of_q < 0) | (self.p_of_q > 1)):
            raise ValueError("p(q) values must lie in [0, 1]")

    def summary(self) -> str:
        head = f"{self.tail}-tail conditional exceedance p(q)"
        if self.note:
            head += f" ({self.note})"
        body = "; ".join(
            f"q={q:g}: {p:.3f}" for q, p in zip(self.q_grid, self.p_of_q)
        )
        return f"{head}\n{body}"


def run_stats_from_outputs(runs: Iterable[SimOutput],
                           default_level: float) -> RunStats:
    """Reduce explicit SimOutputs to the per-run statistics arrays."""
    fracs, counts, means, deltas = [], [], [], []
    grid = None
    m = None
    for out in runs:
        grid = out.grid
        m = out.paths.shape[0]
        defaulted = int(np.count_nonzero(out.running_min <= default_level))
        counts.append(defaulted)
        fracs.append(defaulted / m)
        means.append(out.paths.mean(axis=0))
        deltas.append(out.paths[:, -1] - out.paths[:, 0])
    if grid is None:
        raise ValueError("need at least one run")
    return RunStats(
        np.asarray(fracs), np.asarray(counts, dtype=np.int64),
        np.asarray(means), np.asarray(deltas), grid, m,
    )


def _grid_index(grid: np.ndarray, t: float) -> int:
    hits = np.flatnonzero(np.isclose(grid, t, rtol=1e-9, atol=1e-12))
    if hits.size != 1:
        raise ValueError(f"time {t} is not a grid point (no interpolation)")
    return int(hits[0])


def sr_mc(runs: Iterable[SimOutput], default_level: float):
    """Systemic-risk fraction and its standard error over Monte Carlo runs.

    Per run: the fraction of banks whose running minimum reached the
    default level; the estimate is the mean over runs, the standard error
    the sample standard deviation divided by sqrt(runs).
    """
    stats = run_stats_from_outputs(runs, default_level)
    return _sr_from_fracs(stats.default_fracs)


def _sr_from_fracs(fracs: np.ndarray):
    sr = float(fracs.mean())
    se = float(fracs.std(ddof=1) / np.sqrt(fracs.size)) if fracs.size > 1 else 0.0
    return sr, se


def add_mc(runs: Iterable[SimOutput], t: float) -> float:
    """Average distance to default at a grid time: grand mean of reserves."""
    stats = run_stats_from_outputs(runs, default_level=-np.inf)
    idx = _grid_index(stats.grid, t)
    return float(stats.mean_paths[:, idx].mean())


def sr_lln(limit_paths: np.ndarray, default_level: float) -> float:
    """LLN systemic-risk indicator from simulated limiting paths."""
    mins = np.min(limit_paths, axis=1)
    return float(np.count_nonzero(mins <= default_level) / mins.size)


def add_lln(curves: LimitCurves, t: float) -> float:
    """LLN average distance to default: Q1 read off the curve grid."""
    return float(curves.q1[_grid_index(curves.grid, t)])


def default_count_distribution(runs: Iterable[SimOutput],
                               default_level: float) -> np.ndarray:
    """Empirical pmf of per-run default counts on {0, ..., M}."""
    stats = run_stats_from_outputs(runs, default_level)
    return pmf_from_counts(stats.default_counts, stats.M)


def pmf_from_counts(counts: np.ndarray, m: int) -> np.ndarray:
    pmf = np.bincount(counts, minlength=m + 1).astype(float)
    return pmf / pmf.sum()


def tail_dependence(samples_i, samples_j, q_grid, tail: str = "upper",
                    min_samples: int = 100) -> DependenceCurve:
    """Empirical conditional exceedance curve p(q) between two samples.

    Both margins are rank-transformed to uniforms (ordinal ranks over
    n + 1) and mapped to unit Frechet z = -1/log(u); p(q) is the fraction
    of joint exceedances of the q-quantile among exceedances of the
    conditioning margin.  Independence gives p(q) close to 1 - q.  The
    lower tail is computed by negating both samples first, which is
    recorded in the curve's note.
    """
    x = np.asarray(samples_i, dtype=np.float64)
    y = np.asarray(samples_j, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("samples must be 1-d arrays of equal length")
    if x.size < min_samples:
        raise ValueError(
            f"need at least {min_samples} samples for a stable estimate, "
            f"got {x.size}"
        )
    q_grid = np.asarray(q_grid, dtype=np.float64)
    if np.any((q_grid <= 0) | (q_grid >= 1)):
        raise ValueError("quantile levels must lie strictly inside (0, 1)")
    if tail not in ("upper", "lower"):
        raise ValueError("tail must be 'upper' or 'lower'")

    note = ""
    if tail == "lower":
        x, y = -x, -y
        note = "lower tail computed by negating both samples"

    zx = _frechet(x)
    zy = _frechet(y)
    p = np.empty(q_grid.size)
    for k, q in enumerate(q_grid):
        tx = np.quantile(zx, q)
        ty = np.quantile(zy, q)
        cond = zy > ty
        n_cond = int(np.count_nonzero(cond))
        p[k] = (
            np.count_nonzero((zx > tx) & cond) / n_cond if n_cond else 0.0
        )
    return DependenceCurve(q_grid, p, tail=tail, note=note)


def _frechet(sample: np.ndarray) -> np.ndarray:
    n = sample.size
    ranks = np.empty(n, dtype=np.float64)
    ranks[np.argsort(sample, kind="stable")] = np.arange(1, n + 1)
    u = ranks / (n + 1.0)
    return -1.0 / np.log(u)


def mean_field_network_spec(p: LimitParams, M: int, T: float, steps: int,
                            regime: str = "hawkes", rho: float = 0.0,
                            D: float = 0.0,
                            size: SizeDistribution | None = None,
                            ) -> NetworkSpec:
    """Finite-M spec in the convention that converges to LimitParams.

    Identical banks; the Hawkes kernel carries the 1/M scaling while
    baseline intensity and per-jump size stay O(1), matching the published
    tables.  ``regime`` selects hawkes, compound_hawkes, poisson (rate mu)
    or none.
    """
    if regime in ("hawkes", "compound_hawkes"):
        jump = JumpRegime(
            kind=regime,
            hawkes=mean_field_hawkes_spec(M, p.mu, p.alpha, p.beta),
            size=size,
        )
    elif regime == "poisson":
        jump = JumpRegime(kind="poisson", rate=p.mu)
    elif regime == "none":
        jump = JumpRegime(kind="none")
    else:
        raise ValueError(f"unknown regime {regime!r}")
    return uniform_network_spec(
        M=M, a=p.a, sigma=p.sigma, c_hat=p.c, rho=rho, jump=jump,
        x0=p.x, D=D, T=T, steps=steps, factor_loading=p.factor_loading,
    )


def mc_risk_report(spec: NetworkSpec, n_runs: int, seed: int,
                   default_level: float | None = None, workers: int = 1,
                   fingerprint: str = "") -> RiskReport:
    """Monte Carlo RiskReport for a network spec (parallel over paths)."""
    level = spec.D if default_level is None else default_level
    stats = monte_carlo_stats(spec, n_runs, seed, level, workers=workers)
    sr, sr_se = _sr_from_fracs(stats.default_fracs)
    add = stats.mean_paths.mean(axis=0)
    add_se = float(
        stats.mean_paths[:, -1].std(ddof=1) / np.sqrt(n_runs)
    ) if n_runs > 1 else 0.0
    return RiskReport(
        sr=sr, sr_se=sr_se, add=add, add_se=add_se, grid=stats.grid,
        n_runs=n_runs, fingerprint=fingerprint,
    )


def fluctuation_scaling(p: LimitParams, regime: str, M_list, n_runs: int,
                        seed: int, T: float = 1.0, steps: int = 100,
                        rho: float = 0.0, workers: int = 1) -> np.ndarray:
    """Variance of sqrt(M)*(mean terminal reserve - Q1(T)) per system size.

    Under the central-limit scaling the variance is approximately constant
    in M.  Returns an array of (M, variance) rows; M_list must increase.
    """
    m_arr = np.asarray(list(M_list), dtype=np.int64)
    if m_arr.size == 0 or np.any(np.diff(m_arr) <= 0):
        raise ValueError("M_list must be non-empty and increasing")
    curves = limit_curves(p, T, steps, scheme="exact")
    q1_T = curves.q1[-1]
    out = np.empty((m_arr.size, 2))
    for row, m in enumerate(m_arr):
        spec = mean_field_network_spec(p, int(m), T, steps, regime=regime,
                                       rho=rho)
        stats = monte_carlo_stats(spec, n_runs, seed + row, spec.D,
                                  workers=workers)
        scaled = np.sqrt(m) * (stats.mean_paths[:, -1] - q1_T)
        variance = float(scaled.var(ddof=1)) if n_runs > 1 else 0.0
        out[row] = (m, variance)
    return out
