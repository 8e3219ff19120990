"""Command-line front end: experiment orchestration and artifact emission.

Subcommands: simulate, limit, risk, depend, fluctuate, calibrate, and
reproduce (canonical table/figure configurations).  Exit codes: 0 success,
1 configuration error (with key/file diagnostics), 2 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .calibration import PARAM_NAMES, fit_q1, load_series, q1_on_times
from .config import ConfigError, ExperimentConfig, parse_overrides
from .io import write_csv, write_dependence_curve, write_limit_curves, \
    write_risk_rows, write_sim_output
from .limits import limit_curves, simulate_limit_state
from .network import NumericalError, monte_carlo_stats, simulate_network
from .risk import (
    pmf_from_counts,
    add_lln,
    fluctuation_scaling,
    mc_risk_report,
    sr_lln,
    tail_dependence,
)

# keeps the LLN path streams disjoint from the Monte Carlo path streams
# that share the same user seed (64-bit golden-ratio offset)
_LLN_SEED_OFFSET = 0x9E3779B97F4A7C15

SUBCOMMANDS = ("simulate", "limit", "risk", "depend", "fluctuate",
               "calibrate", "reproduce")
REPRODUCE_TARGETS = ("table1", "table2", "fig2", "fig5")


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to the config-error exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _table_config(mu: float, x0_values, seed: int) -> dict:
    return {
        "seed": seed,
        "network": {
            "M": 300, "T": 1.0, "steps": 100, "rho": 0.0, "D": 0.0,
            "a": 0.5, "sigma": 0.5, "c_hat": -0.2, "jump_kind": "hawkes",
        },
        "hawkes": {"mu": mu, "alpha": 1.0, "beta": 1.2, "scale_by_m": True},
        "limit": {
            "mu": mu, "alpha": 1.0, "beta": 1.2, "a": 0.5, "sigma": 0.5,
            "c": -0.2, "T": 1.0, "steps": 100, "scheme": "paper_euler",
        },
        "risk": {
            "runs": 5000, "lln_paths": 100_000, "x0_values": list(x0_values),
        },
    }


CANONICAL = {
    "table1": _table_config(0.01, [0.002, 0.1, 0.2, 0.5, 0.8, 1.0], seed=101),
    "table2": _table_config(0.05, [0.01, 0.1, 0.2, 0.5, 0.8, 1.0], seed=102),
    "fig2": {
        "seed": 103,
        "risk": {"runs": 10_000},
    },
    "fig5": {
        "seed": 104,
        "limit": {
            "mu": 0.2, "alpha": 1.2, "beta": 1.2, "a": 0.5, "sigma": 0.5,
            "c": -1.0, "T": 1.0, "steps": 100, "scheme": "exact",
        },
        "risk": {"lln_paths": 100_000},
    },
}

_FIG2_SCENARIOS = (
    "no_lending_independent",
    "lending_correlated",
    "lending_correlated_poisson",
    "lending_correlated_hawkes",
)


def build_parser() -> _Parser:
    parser = _Parser(prog="mfhawkes", description=__doc__)
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument(
        "target", nargs="?", default=None,
        help="config file path, or a reproduce target "
             f"({'|'.join(REPRODUCE_TARGETS)})",
    )
    parser.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE",
        help="dotted config override, e.g. --set network.M=300",
    )
    parser.add_argument(
        "--workers", type=int, default=0,
        help="Monte Carlo worker processes (default: available cores)",
    )
    parser.add_argument("--outdir", default=None,
                        help="output directory (overrides output.dir)")
    parser.add_argument("--runs", type=int, default=None,
                        help="shorthand for --set risk.runs=N")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"mfhawkes: config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"mfhawkes: numerical failure: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    workers = args.workers if args.workers > 0 else (os.cpu_count() or 1)
    overrides = parse_overrides(args.set)
    if args.runs is not None:
        overrides.append(("risk.runs", args.runs))

    if args.subcommand == "reproduce":
        if args.target not in REPRODUCE_TARGETS:
            raise ConfigError(
                f"reproduce target must be one of {', '.join(REPRODUCE_TARGETS)}"
            )
        cfg = ExperimentConfig.from_dict(CANONICAL[args.target],
                                         overrides=overrides)
        outdir = Path(args.outdir or cfg.section("output")["dir"])
        return _run_reproduce(args.target, cfg, outdir, workers)

    if args.target is None:
        raise ConfigError(f"subcommand {args.subcommand} requires a config file")
    cfg = ExperimentConfig.from_file(args.target, overrides=overrides)
    outdir = Path(args.outdir or cfg.section("output")["dir"])
    handler = {
        "simulate": _run_simulate,
        "limit": _run_limit,
        "risk": _run_risk,
        "depend": _run_depend,
        "fluctuate": _run_fluctuate,
        "calibrate": _run_calibrate,
    }[args.subcommand]
    return handler(cfg, outdir, workers)


def _run_simulate(cfg, outdir, workers) -> int:
    spec = cfg.network_spec()
    fp = cfg.fingerprint()
    n_runs = cfg.section("risk")["runs"]
    for j in range(n_runs):
        out = simulate_network(
            spec, np.random.SeedSequence(entropy=cfg.seed, spawn_key=(j,))
        )
        path = write_sim_output(outdir / f"paths_run{j}.csv", out, fp)
        print(f"wrote {path}")
    return 0


def _run_limit(cfg, outdir, workers) -> int:
    lim = cfg.section("limit")
    curves = limit_curves(cfg.limit_params(), lim["T"], lim["steps"],
                          scheme=lim["scheme"])
    path = write_limit_curves(outdir / "limit_curves.csv", curves,
                              cfg.fingerprint())
    print(f"wrote {path}")
    return 0


def _risk_rows(cfg, workers):
    """One MC-versus-LLN row per initial reserve level."""
    net = cfg.section("network")
    lim = cfg.section("limit")
    rk = cfg.section("risk")
    x0_values = rk["x0_values"] or [net["x0"]]
    add_t = rk["add_time"] if rk["add_time"] >= 0 else net["T"]
    fp = cfg.fingerprint()
    rows = []
    for x0 in x0_values:
        spec = cfg.network_spec(x0=x0)
        report = mc_risk_report(spec, rk["runs"], cfg.seed, workers=workers,
                                fingerprint=fp)
        p = cfg.limit_params(x=x0)
        curves = limit_curves(p, lim["T"], lim["steps"], scheme=lim["scheme"])
        paths = simulate_limit_state(p, curves, rk["lln_paths"],
                                     seed=cfg.seed ^ _LLN_SEED_OFFSET)
        sr_l = sr_lln(paths, net["D"])
        sr_l_se = np.sqrt(max(sr_l * (1 - sr_l), 0.0) / rk["lln_paths"])
        rows.append((
            x0, report.sr, report.sr_se, report.add_terminal, report.add_se,
            sr_l, sr_l_se, add_lln(curves, add_t),
        ))
    return rows


def _run_risk(cfg, outdir, workers) -> int:
    rows = _risk_rows(cfg, workers)
    path = write_risk_rows(outdir / "risk_table.csv", rows, cfg.fingerprint())
    print(f"wrote {path}")
    print(f"{'x0':>8} {'SR_MC':>8} {'ADD_MC':>8} {'SR_LLN':>8} {'ADD_LLN':>8}")
    for row in rows:
        print(f"{row[0]:8.3g} {row[1]:8.3f} {row[3]:8.3f} "
              f"{row[5]:8.3f} {row[7]:8.3f}")
    return 0


def _run_depend(cfg, outdir, workers) -> int:
    rk = cfg.section("risk")
    spec = cfg.network_spec()
    i, j = rk["node_i"], rk["node_j"]
    if not (0 <= i < spec.M and 0 <= j < spec.M):
        raise ConfigError("risk.node_i / node_j must index banks")
    stats = monte_carlo_stats(spec, rk["runs"], cfg.seed, spec.D,
                              workers=workers)
    if rk["sample_mode"] == "increments":
        xs = stats.terminal_delta[:, i]
        ys = stats.terminal_delta[:, j]
    elif rk["sample_mode"] == "levels":
        xs = stats.terminal_delta[:, i] + spec.x0[i]
        ys = stats.terminal_delta[:, j] + spec.x0[j]
    else:
        raise ConfigError("risk.sample_mode must be increments or levels")
    curve = tail_dependence(xs, ys, rk["q_grid"], tail=rk["tail"])
    path = write_dependence_curve(outdir / "dependence.csv", curve,
                                  cfg.fingerprint())
    print(f"wrote {path}")
    print(curve.summary())
    return 0


def _run_fluctuate(cfg, outdir, workers) -> int:
    rk = cfg.section("risk")
    lim = cfg.section("limit")
    net = cfg.section("network")
    table = fluctuation_scaling(
        cfg.limit_params(), rk["regime"], rk["m_values"], rk["runs"],
        cfg.seed, T=lim["T"], steps=lim["steps"], rho=net["rho"],
        workers=workers,
    )
    path = write_csv(outdir / "fluctuation_scaling.csv", ["M", "variance"],
                     ((int(m), v) for m, v in table), cfg.fingerprint())
    print(f"wrote {path}")
    return 0


def _run_calibrate(cfg, outdir, workers) -> int:
    cal = cfg.section("calibration")
    if not cal["series"]:
        raise ConfigError("calibration.series must point to a CSV file")
    series = load_series(cfg.base_dir / cal["series"])
    bounds = None
    if cal["lower"] and cal["upper"]:
        bounds = list(zip(cal["lower"], cal["upper"]))
    result = fit_q1(series, cal["initial"], bounds=bounds,
                    max_evals=cal["max_evals"])
    fp = cfg.fingerprint()
    rows = list(zip(PARAM_NAMES, result.params)) + [
        ("sse", result.sse),
        ("iterations", result.iterations),
        ("converged", int(result.converged)),
    ]
    path = write_csv(outdir / "calibration.csv", ["name", "value"], rows, fp)
    fitted = q1_on_times(result.params, series.times)
    write_csv(outdir / "fitted_curve.csv", ["t", "observed", "fitted"],
              zip(series.times, series.values, fitted), fp)
    print(f"wrote {path}")
    print("fitted parameters "
          + ", ".join(f"{n}={v:.6g}" for n, v in zip(PARAM_NAMES, result.params)))
    print(f"sse={result.sse:.6g} iterations={result.iterations} "
          f"converged={result.converged}")
    return 0


def _run_reproduce(target, cfg, outdir, workers) -> int:
    from . import plots

    fp = cfg.fingerprint()
    if target in ("table1", "table2"):
        rows = _risk_rows(cfg, workers)
        path = write_risk_rows(outdir / f"{target}.csv", rows, fp)
        x0s = [row[0] for row in rows]
        if cfg.section("output")["plots"]:
            plots.line_chart(
                outdir / f"{target}_sr.svg", x0s,
                {"SR (Monte Carlo)": [r[1] for r in rows],
                 "SR (LLN approximation)": [r[5] for r in rows]},
                xlabel="initial reserve x0", ylabel="systemic risk indicator",
            )
            plots.line_chart(
                outdir / f"{target}_add.svg", x0s,
                {"ADD(T) (Monte Carlo)": [r[3] for r in rows],
                 "ADD(T) (LLN approximation)": [r[7] for r in rows]},
                xlabel="initial reserve x0", ylabel="average distance to default",
            )
        print(f"wrote {path}")
        return 0

    if target == "fig2":
        from .network import scenario_preset

        n_runs = cfg.section("risk")["runs"]
        pmfs = {}
        m = None
        for name in _FIG2_SCENARIOS:
            spec = scenario_preset(name)
            m = spec.M
            stats = monte_carlo_stats(spec, n_runs, cfg.seed, spec.D,
                                      workers=workers)
            pmfs[name] = pmf_from_counts(stats.default_counts, spec.M)
        header = ["n_defaults"] + list(_FIG2_SCENARIOS)
        rows = (
            [n] + [pmfs[name][n] for name in _FIG2_SCENARIOS]
            for n in range(m + 1)
        )
        path = write_csv(outdir / "fig2_default_counts.csv", header, rows, fp)
        if cfg.section("output")["plots"]:
            plots.bar_chart(
                outdir / "fig2_default_counts.svg", list(range(m + 1)),
                {name: pmfs[name] for name in _FIG2_SCENARIOS},
                xlabel="number of defaults", ylabel="probability",
            )
        print(f"wrote {path}")
        return 0

    # fig5: LLN indicators for Hawkes versus Poisson over the x0 grid
    lim = cfg.section("limit")
    lln_paths = cfg.section("risk")["lln_paths"]
    x0s = np.round(np.arange(0.0, 1.0001, 0.05), 10)
    sr_h, sr_p, add_h, add_p = [], [], [], []
    for x0 in x0s:
        p_hawkes = cfg.limit_params(x=float(x0))
        p_poisson = cfg.limit_params(x=float(x0))
        p_poisson.alpha = 0.0  # constant intensity mu: the Poisson benchmark
        for p, srs, adds in ((p_hawkes, sr_h, add_h),
                             (p_poisson, sr_p, add_p)):
            curves = limit_curves(p, lim["T"], lim["steps"], scheme=lim["scheme"])
            paths = simulate_limit_state(p, curves, lln_paths,
                                         seed=cfg.seed ^ _LLN_SEED_OFFSET)
            srs.append(sr_lln(paths, 0.0))
            adds.append(float(curves.q1[-1]))
    rows = zip(x0s, sr_h, sr_p, add_h, add_p)
    path = write_csv(
        outdir / "fig5_lln_indicators.csv",
        ["x0", "sr_hawkes", "sr_poisson", "add_hawkes", "add_poisson"],
        rows, fp,
    )
    if cfg.section("output")["plots"]:
        plots.line_chart(
            outdir / "fig5_sr.svg", x0s,
            {"Hawkes": sr_h, "Poisson": sr_p},
            xlabel="initial reserve x0", ylabel="LLN systemic risk",
        )
        plots.line_chart(
            outdir / "fig5_add.svg", x0s,
            {"Hawkes": add_h, "Poisson": add_p},
            xlabel="initial reserve x0", ylabel="LLN distance to default",
        )
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
