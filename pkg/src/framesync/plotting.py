"""
Figure rendering for the report commands.

Every report command writes its delimited data files and, alongside
them, a rendered figure: ROC curves per SNR, the AUC histogram of a
sync-word search, and a complexity bar chart.  The Agg backend is
forced so rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["plot_roc", "plot_auc_hist", "plot_complexity"]

_DETECTOR_LABELS = {
    "lrt": "LRT",
    "alrt": "ALRT",
    "ralrt": "RALRT",
    "salrt": "SALRT",
    "correlator": "Correlator",
}


def plot_roc(curves: dict, snr_db: float, path) -> None:
    """One ROC figure with a curve per detector."""
    fig, ax = plt.subplots(figsize=(6, 5))
    for detector_id, curve in curves.items():
        ax.plot(
            curve.p_fa,
            curve.p_d,
            label=_DETECTOR_LABELS.get(detector_id, detector_id),
            linewidth=1.4,
        )
    ax.plot([0, 1], [0, 1], "k:", linewidth=0.8, label="chance")
    ax.set_xlabel("probability of false alarm")
    ax.set_ylabel("probability of detection")
    ax.set_title(f"ROC at SNR = {snr_db:g} dB")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_auc_hist(edges, pdf, cdf, path) -> None:
    """PDF and CDF panels of the searched sync words' AUC values."""
    fig, (ax_pdf, ax_cdf) = plt.subplots(1, 2, figsize=(10, 4))
    centers = (edges[:-1] + edges[1:]) / 2.0
    widths = edges[1:] - edges[:-1]
    ax_pdf.bar(centers, pdf, width=widths, edgecolor="none")
    ax_pdf.set_xlabel("AUC")
    ax_pdf.set_ylabel("density")
    ax_pdf.set_title("AUC probability density")
    ax_pdf.grid(True, alpha=0.3)
    ax_cdf.step(edges[1:], cdf, where="post")
    ax_cdf.set_xlabel("AUC")
    ax_cdf.set_ylabel("cumulative probability")
    ax_cdf.set_title("AUC cumulative distribution")
    ax_cdf.set_ylim(0, 1.02)
    ax_cdf.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_complexity(rows: list, path) -> None:
    """Log-scale bar chart of complex multiplications and additions."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    labels = [_DETECTOR_LABELS.get(r["detector"], r["detector"]) for r in rows]
    x = range(len(rows))
    ax.bar([i - 0.2 for i in x], [r["cm"] for r in rows], width=0.4, label="CM")
    ax.bar([i + 0.2 for i in x], [r["ca"] for r in rows], width=0.4, label="CA")
    ax.set_yscale("log")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels)
    ax.set_ylabel("operation count")
    ax.set_title("Detector computational complexity")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
