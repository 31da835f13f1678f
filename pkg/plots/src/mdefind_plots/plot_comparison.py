"""Sparse-regression accuracy comparison figure.

One panel per (initial condition, puffer) setup.  Each model from the
hyperparameter sweeps is a point: mean relative coefficient error (log
scale) against the number of terms in the model.  Models containing at
least one incorrect term have no meaningful MRE; they are drawn above the
black y = 1 rule at evenly spaced positions (sorted, arbitrary heights).
"""

import math
import sys

import matplotlib.pyplot as plt

from .common import run_cli

REQUIRED = ["case", "ic_mode", "puffer", "algorithm", "term_count",
            "valid", "mre"]

MARKERS = {"foba": "o", "stridge": "s", "lasso": "^", "sr3": "D"}
INVALID_BAND = (2.0, 100.0)  # arbitrary display heights above the y=1 rule


def _setups(rows):
    seen = []
    for row in rows:
        key = (row["ic_mode"], bool(row["puffer"]))
        if key not in seen:
            seen.append(key)
    return seen


def render(rows):
    """Render the comparison CSV into a multi-panel figure."""
    setups = _setups(rows) or [("spline", False)]
    fig, axes = plt.subplots(
        1, len(setups), figsize=(4.2 * len(setups), 3.6), squeeze=False
    )
    algorithms = sorted({row["algorithm"] for row in rows}) or ["foba"]

    for ax, (ic_mode, puffer) in zip(axes[0], setups):
        panel = [r for r in rows
                 if r["ic_mode"] == ic_mode and bool(r["puffer"]) == puffer]
        invalid = sorted(
            (r for r in panel if not r["valid"]),
            key=lambda r: (r["algorithm"], r["term_count"]),
        )
        lo, hi = INVALID_BAND
        for i, row in enumerate(invalid):
            frac = i / max(len(invalid) - 1, 1)
            row["_display_mre"] = lo * (hi / lo) ** frac
        for algorithm in algorithms:
            xs, ys = [], []
            for row in panel:
                if row["algorithm"] != algorithm:
                    continue
                y = row["mre"] if row["valid"] else row["_display_mre"]
                if y is None or (isinstance(y, float) and math.isnan(y)):
                    continue
                xs.append(row["term_count"])
                ys.append(y)
            ax.scatter(xs, ys, marker=MARKERS.get(algorithm, "x"),
                       label=algorithm, alpha=0.75, edgecolors="none")
        ax.axhline(1.0, color="black", linewidth=1.0)
        ax.set_yscale("log")
        ax.set_xlabel("terms in model")
        ax.set_title(f"{ic_mode} IC, {'with' if puffer else 'no'} puffer")
    axes[0][0].set_ylabel("MRE")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    return fig


def main(argv=None):
    return run_cli(argv, render, REQUIRED, default_suffix="_comparison.svg")


if __name__ == "__main__":
    sys.exit(main())
