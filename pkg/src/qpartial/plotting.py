"""Figures written next to the CSV reports.

Uses the object-oriented matplotlib API with the Agg canvas so nothing
depends on a display or on pyplot global state.
"""
from __future__ import annotations

import math

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure


def _new_figure(ncols=1):
    fig = Figure(figsize=(4.5 * ncols, 3.5), tight_layout=True)
    FigureCanvasAgg(fig)
    axes = [fig.add_subplot(1, ncols, i + 1) for i in range(ncols)]
    return fig, axes


def plot_optimum_sweep(optima, path):
    """Optimal rescaled parameters and saved queries against K/t."""
    xs = [o.Ktilde for o in optima]
    fig, (ax1, ax2) = _new_figure(2)
    ax1.plot(xs, [o.eta_tilde for o in optima], "o-", label=r"$\tilde\eta$")
    ax1.plot(xs, [o.alpha_tilde for o in optima], "s-", label=r"$\tilde\alpha$")
    ax1.axhline(math.sqrt(3) / 2, color="0.6", lw=0.8, ls="--")
    ax1.axhline(math.pi / 6, color="0.6", lw=0.8, ls=":")
    ax1.set_xscale("log")
    ax1.set_xlabel("K / t")
    ax1.legend(frameon=False)
    ax2.plot(xs, [o.eta_tilde - o.alpha_tilde for o in optima], "o-", color="C2")
    ax2.set_xscale("log")
    ax2.set_xlabel("K / t")
    ax2.set_ylabel(r"saved queries / $\sqrt{b/\tau}$")
    fig.savefig(path, dpi=120)
    return path


def plot_run_records(records, path):
    """Total queries vs full search per configuration, and final target mass."""
    ok = [r for r in records if r.error is None]
    labels = [f"{r.N}/{r.K}/{r.t}/{r.tau}" for r in ok]
    xs = range(len(ok))
    fig, (ax1, ax2) = _new_figure(2)
    ax1.plot(xs, [r.total_queries for r in ok], "o", label="partial search")
    ax1.plot(xs, [r.full_queries for r in ok], "x", label="full search")
    ax1.set_ylabel("oracle queries")
    ax1.legend(frameon=False)
    ax2.plot(xs, [r.target_mass for r in ok], "o", color="C3")
    ax2.set_ylabel("target-block probability")
    for ax in (ax1, ax2):
        ax.set_xticks(list(xs))
        ax.set_xticklabels(labels, rotation=60, fontsize=7)
        ax.set_xlabel("N/K/t/tau")
    fig.savefig(path, dpi=120)
    return path
