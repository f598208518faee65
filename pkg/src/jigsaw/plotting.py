"""Matplotlib figures for experiment reports.

Figures are written with the Agg backend and without the ``Software``
metadata stamp, so identical inputs produce identical PNG bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_RC = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
    "figure.figsize": (4.8, 3.0),
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def plot_comparison(rows, path, metric="pst"):
    """Bar chart of ``metric`` per method; ``rows`` are dicts with ``method`` and metric keys."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        names = [r["method"] for r in rows]
        values = [r[metric] for r in rows]
        bars = ax.bar(names, values, color=["0.6"] + ["C0"] * (len(rows) - 1))
        for bar, v in zip(bars, values):
            ax.annotate(f"{v:.3f}", (bar.get_x() + bar.get_width() / 2, v),
                        ha="center", va="bottom", fontsize=8)
        ax.set_ylabel(metric.upper())
        ax.set_ylim(0, max(1.0, max(values) * 1.15))
        _save(fig, path)


def plot_convergence(history, path):
    """Per-round Hellinger moves; ``history`` is a flat list or ``(size, list)`` pairs."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        if history and isinstance(history[0], tuple):
            start = 1
            for size, trace in history:
                rounds = range(start, start + len(trace))
                ax.semilogy(rounds, [max(d, 1e-17) for d in trace], marker=".", label=f"size {size}")
                start += len(trace)
            ax.legend(frameon=False)
        else:
            ax.semilogy(range(1, len(history) + 1), [max(d, 1e-17) for d in history], marker=".")
        ax.set_xlabel("round")
        ax.set_ylabel("Hellinger move")
        _save(fig, path)


def plot_scaling(rows, path):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for n_cpms in sorted({r.n_cpms for r in rows}):
            sel = [r for r in rows if r.n_cpms == n_cpms]
            ax.loglog([r.entries for r in sel], [r.seconds for r in sel], marker="o",
                      label=f"{n_cpms} CPMs")
        ax.set_xlabel("global PMF entries")
        ax.set_ylabel("seconds")
        ax.legend(frameon=False)
        _save(fig, path)


def plot_saturation(counts, gains, path):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(counts, gains, marker="o")
        ax.set_xlabel("number of CPMs")
        ax.set_ylabel("mean PST gain")
        _save(fig, path)
