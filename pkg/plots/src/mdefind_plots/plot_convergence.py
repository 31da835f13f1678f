"""Particle-swarm convergence of the RMS-VIF objective.

Training-set trace drawn solid, test-set trace dashed, log y-axis.
A missing test trace (e.g. runs reusing a stored test IC) is skipped.
"""

import sys

import matplotlib.pyplot as plt

from .common import run_cli

REQUIRED = ["iteration", "train_rms_vif", "test_rms_vif"]


def render(rows):
    """Render the PSO trace CSV."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for key, style, label in (
        ("train_rms_vif", "-", "training set"),
        ("test_rms_vif", "--", "test set"),
    ):
        pts = [(r["iteration"], r[key]) for r in rows if r[key] is not None]
        if pts:
            ax.plot(*zip(*pts), style, label=label)
    ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("RMS-VIF")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def main(argv=None):
    return run_cli(argv, render, REQUIRED, default_suffix="_convergence.svg")


if __name__ == "__main__":
    sys.exit(main())
