"""Model selection across spatial resolutions.

Left axis: number of terms in the BIC-selected model (cross markers) and
in the optimal choice (circles).  Markers are blue when the model contains
only correct terms and red when at least one term is incorrect.  Right
axis (log scale): MAE and MRE of the optimal model.
"""

import math
import sys

import matplotlib.pyplot as plt

from .common import run_cli

REQUIRED = ["nx", "failed", "bic_k", "bic_n_incorrect", "optimal_k",
            "optimal_mre", "optimal_mae", "bic_matches_optimal"]


def render(rows):
    """Render the resolution-study CSV."""
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    usable = [r for r in rows if not r["failed"]]

    for row in usable:
        nx = row["nx"]
        bic_color = "tab:blue" if row["bic_n_incorrect"] == 0 else "tab:red"
        ax.plot(nx, row["bic_k"], marker="x", color=bic_color, linestyle="")
        # the optimal choice contains correct terms only, by construction
        opt_color = "tab:blue" if row["optimal_k"] > 0 else "tab:red"
        ax.plot(nx, row["optimal_k"], marker="o", markerfacecolor="none",
                color=opt_color, linestyle="")
    ax.set_xlabel("spatial resolution nx")
    ax.set_ylabel("terms in model")

    right = ax.twinx()
    xs = [r["nx"] for r in usable]
    for key, style in (("optimal_mre", "-"), ("optimal_mae", "--")):
        ys = [r[key] for r in usable]
        pts = [(x, y) for x, y in zip(xs, ys)
               if y is not None and not math.isnan(y)]
        if pts:
            right.plot(*zip(*pts), style, color="gray",
                       label=key.replace("optimal_", "").upper())
    right.set_yscale("log")
    right.set_ylabel("optimal-model error")
    right.legend(fontsize=8, loc="upper right")

    handles = [
        plt.Line2D([], [], marker="x", linestyle="", color="black",
                   label="BIC selection"),
        plt.Line2D([], [], marker="o", markerfacecolor="none", linestyle="",
                   color="black", label="optimal choice"),
    ]
    ax.legend(handles=handles, fontsize=8, loc="upper left")
    fig.tight_layout()
    return fig


def main(argv=None):
    return run_cli(argv, render, REQUIRED, default_suffix="_resolution.svg")


if __name__ == "__main__":
    sys.exit(main())
