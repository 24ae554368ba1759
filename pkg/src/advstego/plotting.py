"""Matplotlib figures for experiment reports.

SVG output is made reproducible by pinning the hash salt used for element
ids and dropping the date from the metadata.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 7,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "advstego",
    "svg.fonttype": "path",
}

PRE_COLOR = "#4c72b0"
POST_COLOR = "#dd8452"


def _panel(ax, results, before, after, title):
    idx = np.arange(len(results))
    pre = [r.stage(before).confidence for r in results]
    post = [r.stage(after).confidence for r in results]
    width = 0.4
    ax.bar(idx - width / 2, pre, width, color=PRE_COLOR, label="before FGSM")
    ax.bar(idx + width / 2, post, width, color=POST_COLOR, label="after FGSM")
    ax.set_title(title)
    ax.set_ylabel("top-1 confidence")
    ax.set_ylim(0, 1.2)
    ax.set_yticks(np.linspace(0, 1, 6))
    ax.set_xticks(idx)
    ax.set_xticklabels([r.image_id for r in results], rotation=90)
    ax.legend(loc="upper right", ncol=2, frameon=False)


def confidence_chart(report, path: str | os.PathLike, max_images: int | None = 60):
    """Grouped bars of top-1 confidence before and after FGSM.

    Two panels: attacks on the clean images and on the payload-injected ones.
    Only the first ``max_images`` images are drawn.
    """
    results = report.results if max_images is None else report.results[:max_images]
    with plt.rc_context(STYLE):
        width = max(6.0, 0.18 * len(results) + 2.0)
        fig, axes = plt.subplots(2, 1, figsize=(width, 6.5), sharex=True)
        _panel(axes[0], results, "clean", "fgsm_clean", "Clean images")
        _panel(axes[1], results, "injected", "fgsm_injected", "Payload-injected images")
        axes[1].set_xlabel("image")
        fig.suptitle(f"Confidence before and after FGSM (epsilon = {report.epsilon}/255)")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
