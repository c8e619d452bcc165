"""Optional figure rendering next to the delimited outputs.

Imported only behind the --figures flag; everything here is a view of
data already written to CSV, never a primary output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def save_heatmap(matrix, title: str, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    image = ax.imshow(matrix, interpolation="nearest")
    fig.colorbar(image, ax=ax)
    ax.set_title(title)
    ax.set_xlabel("w")
    ax.set_ylabel("v")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_profile(radii, values, stderr, title: str, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    if stderr is None:
        ax.plot(radii, values, marker="o")
    else:
        ax.errorbar(radii, values, yerr=stderr, marker="o", capsize=3)
    ax.set_title(title)
    ax.set_xlabel("R")
    ax.set_ylabel("max Q(v, w) over d(v, w) > R")
    ax.set_yscale("log" if min(values, default=0.0) > 0.0 else "linear")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_series(cutoffs, partial_sums, label: str, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(cutoffs, partial_sums, marker="o", label=label)
    ax.set_xlabel("cutoff R")
    ax.set_ylabel("partial sum")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
