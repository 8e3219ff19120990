"""Static SVG chart emission for the CLI (line and bar charts only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

# strip volatile metadata so repeated runs emit identical files
_SAVE_KW = {"format": "svg", "metadata": {"Date": None}}
plt.rcParams["svg.hashsalt"] = "mfhawkes"


def line_chart(path, x, series: dict, xlabel: str, ylabel: str,
               title: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in series.items():
        ax.plot(x, y, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def bar_chart(path, positions, series: dict, xlabel: str, ylabel: str,
              title: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    n = max(len(series), 1)
    width = 0.8 / n
    for k, (label, y) in enumerate(series.items()):
        offset = (k - (n - 1) / 2) * width
        ax.bar([p + offset for p in positions], y, width=width, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path
