"""Systemic risk in mean-field interbank networks with self- and
cross-exciting (Hawkes) reserve shocks.

Subpackages by concern: ``hawkes`` (exact point-process simulation),
``network`` (finite-M Monte Carlo), ``limits`` (deterministic
large-network limit objects), ``risk`` (indicators and dependence
measures), ``calibration`` (curve fitting), ``cli`` (experiment runner).

The stepping hot loop runs on a compiled extension when available and on
a numpy fallback otherwise; see ``mfhawkes._backend``.
"""

from ._backend import USING_COMPILED
from .hawkes import (
    EventLog,
    HawkesSpec,
    IntensityState,
    SupercriticalWarning,
    branching_matrix,
    intensity_path,
    simulate_hawkes,
    spectral_radius,
)
from .limits import (
    LimitCurves,
    LimitParams,
    conditional_limit_mean,
    limit_curves,
    limit_intensity,
    q1_curve,
    simulate_limit_state,
)
from .network import (
    BankParams,
    JumpRegime,
    NetworkSpec,
    NumericalError,
    SimOutput,
    SizeDistribution,
    empirical_mean_path,
    monte_carlo_stats,
    scenario_preset,
    simulate_network,
)
from .risk import (
    DependenceCurve,
    RiskReport,
    add_lln,
    add_mc,
    default_count_distribution,
    fluctuation_scaling,
    sr_lln,
    sr_mc,
    tail_dependence,
)
from .calibration import CalibResult, ObservedSeries, fit_q1, load_series

__version__ = "0.1.0"

__all__ = [
    "USING_COMPILED",
    "__version__",
    # hawkes
    "EventLog", "HawkesSpec", "IntensityState", "SupercriticalWarning",
    "branching_matrix", "intensity_path", "simulate_hawkes", "spectral_radius",
    # limits
    "LimitCurves", "LimitParams", "conditional_limit_mean", "limit_curves",
    "limit_intensity", "q1_curve", "simulate_limit_state",
    # network
    "BankParams", "JumpRegime", "NetworkSpec", "NumericalError", "SimOutput",
    "SizeDistribution", "empirical_mean_path", "monte_carlo_stats",
    "scenario_preset", "simulate_network",
    # risk
    "DependenceCurve", "RiskReport", "add_lln", "add_mc",
    "default_count_distribution", "fluctuation_scaling", "sr_lln", "sr_mc",
    "tail_dependence",
    # calibration
    "CalibResult", "ObservedSeries", "fit_q1", "load_series",
]
