"""Manufactured-solution convergence figure.

Log-log error norms against spatial resolution, with the L2 and Linf
curves of each scheme in the CSV.  Failed (unstable) resolutions are
omitted from the curves.
"""

import sys

import matplotlib.pyplot as plt

from .common import run_cli

REQUIRED = ["scheme", "nx", "failed", "l2", "linf"]


def render(rows):
    """Render the MMS convergence CSV."""
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    schemes = sorted({r["scheme"] for r in rows})
    for scheme in schemes:
        usable = [r for r in rows if r["scheme"] == scheme and not r["failed"]]
        if not usable:
            continue
        xs = [r["nx"] for r in usable]
        ax.loglog(xs, [r["l2"] for r in usable], "o-",
                  label=f"{scheme} L2")
        ax.loglog(xs, [r["linf"] for r in usable], "s--",
                  label=f"{scheme} Linf")
    ax.set_xlabel("spatial resolution nx")
    ax.set_ylabel("error norm")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def main(argv=None):
    return run_cli(argv, render, REQUIRED, default_suffix="_mms.svg")


if __name__ == "__main__":
    sys.exit(main())
