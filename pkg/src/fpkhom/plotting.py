"""Matplotlib settings and log-log convergence figures."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

golden_mean = (np.sqrt(5) - 1.0) / 2.0
fig_width = 5.0
fig_size = [fig_width, fig_width * golden_mean * 1.2]

colors = ["#08589e", "#d95f0e", "#2b8cbe", "#fe9929", "#4eb3d3", "#993404"]
markers = {"even": "o", "odd": "s"}
linestyles = {"even": "-", "odd": "--"}

params = {
    "axes.prop_cycle": matplotlib.cycler(color=colors),
    "axes.labelsize": 10,
    "font.family": "serif",
    "font.size": 9,
    "mathtext.fontset": "stix",
    "legend.fontsize": 7,
    "legend.frameon": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": fig_size,
    "lines.markersize": 4,
    "lines.linewidth": 1.2,
    "svg.fonttype": "path",
    # fixed ids so that repeated runs write identical files
    "svg.hashsalt": "fpkhom",
}


def convergence_figure(series, title=None):
    """Log-log plot of error against ``h``.

    Parameters
    ----------
    series : list of dict
        Each entry has keys ``norm``, ``parity``, ``h``, ``err`` and an
        optional ``slope`` shown in the legend.
    title : str, optional

    Returns
    -------
    matplotlib.figure.Figure
    """
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        norms = sorted({s["norm"] for s in series}, key=[s["norm"] for s in series].index)
        for s in series:
            color = colors[norms.index(s["norm"]) % len(colors)]
            label = f"{s['norm']} ({s['parity']})"
            if s.get("slope") is not None:
                label += f", slope {s['slope']:.2f}"
            ax.loglog(s["h"], s["err"], color=color, marker=markers.get(s["parity"], "o"),
                      linestyle=linestyles.get(s["parity"], "-"), label=label)
        ax.set_xlabel(r"$h$")
        ax.set_ylabel("error")
        if title:
            ax.set_title(title, fontsize=9)
        ax.grid(True, which="major", alpha=0.3)
        ax.legend(loc="best")
        fig.tight_layout()
    return fig


def save_svg(fig, path):
    """Write ``fig`` as plain SVG without a timestamp."""
    with plt.rc_context(params):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
