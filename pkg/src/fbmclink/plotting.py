"""Report figures rendered next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["ber_figure", "exit_figure", "psd_figure", "save_figure"]


def save_figure(fig, path, dpi: int = 150) -> None:
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)


def ber_figure(curves: dict):
    """curves: label -> list of BerPoint."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, points in curves.items():
        snr = [p.snr_db for p in points]
        ber = [max(p.ber, 1e-12) for p in points]
        ax.semilogy(snr, ber, marker="o", label=label)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    return fig


def exit_figure(inner_curves=(), outer_curves=(), trajectories=(),
                percentile_curves=(), individual=()):
    """EXIT chart: inner curves on (ia, ie), outer curves swapped."""
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    for curve in individual:
        ax.plot(curve.ia, curve.ie, color="0.6", lw=0.5, zorder=1)
    for curve in inner_curves:
        label = f"inner {curve.meta.get('snr_db', '')} dB"
        ax.plot(curve.ia, curve.ie, lw=2, label=label, zorder=3)
    for curve in outer_curves:
        label = f"outer i_dec={curve.meta.get('i_dec', '')}"
        ax.plot(curve.ie, curve.ia, lw=2, ls="--", label=label, zorder=3)
    for curve in percentile_curves:
        label = f"{curve.meta.get('percentile', '')}th percentile"
        ax.plot(curve.ia, curve.ie, lw=2.5, label=label, zorder=4)
    for tr in trajectories:
        pts = np.asarray(tr.points)
        if len(pts):
            ax.plot(pts[:, 0], pts[:, 1], color="green", lw=1,
                    drawstyle="steps-post", zorder=2)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("a-priori MI at the demapper")
    ax.set_ylabel("extrinsic MI of the demapper")
    ax.grid(True, alpha=0.4)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="lower right", fontsize=8)
    return fig


def psd_figure(freq, curves: dict, subcarrier_spacing: float | None = None):
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    x = np.asarray(freq)
    xlabel = "frequency (Hz)"
    if subcarrier_spacing:
        x = x / subcarrier_spacing
        xlabel = "frequency (subcarrier spacings)"
    for label, psd_db in curves.items():
        ax.plot(x, psd_db, label=label, lw=1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("normalized PSD (dB)")
    ax.set_ylim(-120, 5)
    ax.grid(True, alpha=0.4)
    ax.legend()
    return fig
