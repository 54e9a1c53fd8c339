"""Figures written next to the JSON reports."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed metadata keeps PNG bytes stable between runs
_PNG_META = {"Software": None}

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 100,
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META if path.suffix.lower() == ".png" else None)
    plt.close(fig)
    return path


def plot_k_sweep(ks: Sequence[int], pearsons: Sequence[float], path, title: str = "") -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        r = [100.0 * p for p in pearsons]
        ax.plot(list(ks), r, marker="o", lw=1.2)
        ax.set_xlabel("number of groups K")
        ax.set_ylabel("Pearson r x 100")
        if r:
            spread = max(r) - min(r)
            ax.set_title(title or f"K sweep (spread {spread:.2f})")
        ax.grid(alpha=0.3)
        return _save(fig, path)


def plot_scores(scores: Sequence[float], gold: Sequence[float], path, title: str = "") -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.scatter(gold, scores, s=8, alpha=0.6)
        ax.set_xlabel("gold score")
        ax.set_ylabel("cosine similarity")
        if title:
            ax.set_title(title)
        ax.grid(alpha=0.3)
        return _save(fig, path)


def plot_bench(block_ms: Sequence[float], mean_ms: float, path, title: str = "") -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.hist(block_ms, bins=min(30, max(5, len(block_ms) // 3)), color="0.4")
        ax.axvline(mean_ms, color="C3", lw=1.2, label=f"mean {mean_ms:.3f} ms")
        ax.set_xlabel("ms per sentence (block average)")
        ax.set_ylabel("blocks")
        ax.legend(frameon=False)
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_inertia(inertia: Sequence[float], path, title: str = "") -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(range(1, len(inertia) + 1), inertia, marker=".", lw=1.0)
        ax.set_xlabel("Lloyd iteration")
        ax.set_ylabel("weighted inertia")
        if title:
            ax.set_title(title)
        ax.grid(alpha=0.3)
        return _save(fig, path)
