"""File-based rendering: scanpath overlays, raster dumps, report figures.

Every PNG written here carries the run configuration in a text chunk so
outputs stay reproducible from their own metadata.
"""

from __future__ import annotations

import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from PIL import Image
from PIL.PngImagePlugin import PngInfo

from .dynamics import Scanpath
from .imaging import Frame, GrayMap
from .metrics import EvalReport

CONFIG_KEY = "gazesim:config"


def _config_text(config: dict | None) -> str:
    return json.dumps(config or {}, sort_keys=True)


def save_gray16(g: GrayMap, path, config: dict | None = None) -> None:
    """Dump a scalar map as a 16-bit grayscale PNG (per-map min/max scaled;
    the original value range is recorded in a text chunk)."""
    lo, hi = float(g.min()), float(g.max())
    scaled = (g - lo) / (hi - lo) if hi > lo else np.zeros_like(g)
    arr = np.round(scaled * 65535.0).astype(np.uint16)
    info = PngInfo()
    info.add_text(CONFIG_KEY, _config_text(config))
    info.add_text("gazesim:range", json.dumps({"min": lo, "max": hi}))
    Image.fromarray(arr).save(path, pnginfo=info)


def render_scanpath_overlay(frame: Frame, scanpath: Scanpath, path, config: dict | None = None) -> None:
    """Numbered fixation circles joined by lines over the stimulus."""
    fig, ax = plt.subplots(figsize=(6, 6 * frame.height / frame.width))
    ax.imshow(frame.pixels)
    if len(scanpath) > 0:
        pos = scanpath.positions()
        ax.plot(pos[:, 0], pos[:, 1], "-", color="yellow", linewidth=1.5, alpha=0.8, zorder=2)
        ax.scatter(pos[:, 0], pos[:, 1], s=350, facecolors="none", edgecolors="red", linewidths=1.8, zorder=3)
        for i, (x, y) in enumerate(pos, start=1):
            ax.annotate(
                str(i), (x, y), color="red", fontsize=9, fontweight="bold", ha="center", va="center", zorder=4
            )
    ax.set_xlim(-0.5, frame.width - 0.5)
    ax.set_ylim(frame.height - 0.5, -0.5)
    ax.set_axis_off()
    fig.savefig(path, dpi=150, bbox_inches="tight", metadata={CONFIG_KEY: _config_text(config)})
    plt.close(fig)


def render_report_figure(report: EvalReport, path, title: str = "", config: dict | None = None) -> None:
    """Aggregate bars with std whiskers plus the per-image score scatter."""
    fig, axes = plt.subplots(1, 3, figsize=(10, 3.2))
    for ax, name in zip(axes, ("sed", "tde", "stde")):
        mean, std = report.aggregate[name]
        values = [getattr(r, name) for r in report.per_image]
        ax.bar([0], [mean], yerr=[std], width=0.5, color="#4878d0", capsize=4)
        jitter = np.linspace(-0.12, 0.12, num=max(len(values), 1))
        ax.plot(jitter, values, "o", color="#333333", markersize=3, alpha=0.6)
        ax.set_title(name.upper())
        ax.set_xticks([])
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={CONFIG_KEY: _config_text(config)})
    plt.close(fig)


def render_tune_heatmap(lambdas, gains, scores: np.ndarray, path, config: dict | None = None) -> None:
    """NSS over the (damping, gain) grid; the best cell is marked."""
    fig, ax = plt.subplots(figsize=(1.2 + 0.9 * len(gains), 1.2 + 0.7 * len(lambdas)))
    im = ax.imshow(scores, cmap="viridis", aspect="auto")
    ax.set_xticks(range(len(gains)), [f"{g:g}" for g in gains])
    ax.set_yticks(range(len(lambdas)), [f"{v:g}" for v in lambdas])
    ax.set_xlabel("global gain")
    ax.set_ylabel("damping")
    best = np.unravel_index(int(np.nanargmax(scores)), scores.shape)
    ax.plot(best[1], best[0], "r*", markersize=14)
    for i in range(len(lambdas)):
        for j in range(len(gains)):
            if np.isfinite(scores[i, j]):
                ax.text(j, i, f"{scores[i, j]:.2f}", ha="center", va="center", color="white", fontsize=8)
    fig.colorbar(im, ax=ax, label="NSS")
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={CONFIG_KEY: _config_text(config)})
    plt.close(fig)
