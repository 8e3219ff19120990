"""CSV and plot emission.

All CSVs are RFC-4180 with '.' decimal separator, floats at 17 significant
digits, and an optional leading comment line carrying the configuration
fingerprint so outputs are traceable to the exact run settings.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = [
    "fmt",
    "write_csv",
    "write_sim_output",
    "write_limit_curves",
    "write_dependence_curve",
    "write_risk_rows",
]


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{x:.17g}"
    return str(x)


def write_csv(path, header, rows, fingerprint: str = "",
              extra_comments=()) -> Path:
    """Write rows of mixed scalars; floats rendered at 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if fingerprint:
        lines.append(f"# config_fingerprint={fingerprint}")
    for comment in extra_comments:
        lines.append(f"# {comment}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_sim_output(path, out, fingerprint: str = "") -> Path:
    """One run's reserve paths: header t,bank_0,...,bank_{M-1}."""
    m = out.paths.shape[0]
    header = ["t"] + [f"bank_{i}" for i in range(m)]
    rows = (
        [out.grid[k]] + list(out.paths[:, k]) for k in range(out.grid.size)
    )
    return write_csv(path, header, rows, fingerprint)


def write_limit_curves(path, curves, fingerprint: str = "") -> Path:
    header = ["t", "lambda_bar", "q1"]
    rows = zip(curves.grid, curves.lambda_bar, curves.q1)
    return write_csv(path, header, rows, fingerprint)


def write_dependence_curve(path, curve, fingerprint: str = "") -> Path:
    comments = [f"tail={curve.tail}"]
    if curve.note:
        comments.append(curve.note)
    return write_csv(path, ["q", "p"], zip(curve.q_grid, curve.p_of_q),
                     fingerprint, extra_comments=comments)


def write_risk_rows(path, rows, fingerprint: str = "") -> Path:
    """MC-versus-LLN table layout, one row per initial reserve level."""
    header = ["x0", "sr_mc", "sr_mc_se", "add_mc", "add_mc_se",
              "sr_lln", "sr_lln_se", "add_lln"]
    return write_csv(path, header, rows, fingerprint)


def write_risk_report(path, report, fingerprint: str = "") -> Path:
    """Single-report serialization: one metric,value,se row per indicator."""
    rows = [
        ("sr", report.sr, report.sr_se),
        ("add_terminal", report.add_terminal, report.add_se),
        ("n_runs", report.n_runs, 0.0),
    ]
    return write_csv(path, ["metric", "value", "se"], rows,
                     fingerprint or report.fingerprint)
