"""Scanpath similarity metrics and the saliency score used for tuning.

SED and TDE are distances (lower is better); STDE maps the normalized
TDE through exp(-d) so identical scanpaths score 1 and distant ones
approach 0 (higher is better). NSS is the mean standardized saliency at
fixation locations.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Scanpath
from .imaging import GrayMap

DEFAULT_SED_GRID = 8  # cells per side at the working resolution
DEFAULT_TDE_WINDOW = 3  # fixations per compared subsequence

_ALPHABET = string.ascii_uppercase + string.ascii_lowercase + string.digits + "+/"


def _cell_char(idx: int) -> str:
    if idx < len(_ALPHABET):
        return _ALPHABET[idx]
    return chr(0x100 + idx - len(_ALPHABET))


def scanpath_to_string(s: Scanpath, width: int, height: int, m: int) -> str:
    """Quantize fixations onto an m x m grid of half-open cells and label
    each with a character (consecutive duplicates are kept)."""
    if m < 1:
        raise ValueError(f"grid size must be >= 1, got {m}")
    chars = []
    for i, f in enumerate(s.fixations):
        if not (0 <= f.x < width and 0 <= f.y < height):
            raise ValueError(f"fixation {i} at ({f.x}, {f.y}) outside {width}x{height}")
        col = int(f.x * m / width)
        row = int(f.y * m / height)
        chars.append(_cell_char(row * m + col))
    return "".join(chars)


def string_edit_distance(s1: str, s2: str) -> int:
    """Levenshtein distance with unit insert/delete/substitute costs."""
    if len(s1) < len(s2):
        s1, s2 = s2, s1
    previous = list(range(len(s2) + 1))
    for i, c1 in enumerate(s1, start=1):
        current = [i]
        for j, c2 in enumerate(s2, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (c1 != c2)))
        previous = current
    return previous[-1]


def sed(model: Scanpath, human: Scanpath, dims: tuple[int, int], m: int = DEFAULT_SED_GRID) -> float:
    """String-edit distance between grid-quantized scanpaths."""
    if len(model) == 0 or len(human) == 0:
        raise ValueError("sed requires non-empty scanpaths")
    w, h = dims
    return float(string_edit_distance(scanpath_to_string(model, w, h, m), scanpath_to_string(human, w, h, m)))


def _window_distance(model_pos: np.ndarray, human_pos: np.ndarray, m: int) -> float:
    if len(model_pos) < m or len(human_pos) < m:
        raise ValueError(f"both scanpaths need at least {m} fixations")
    mw = np.stack([model_pos[i : i + m] for i in range(len(model_pos) - m + 1)])
    hw = np.stack([human_pos[i : i + m] for i in range(len(human_pos) - m + 1)])
    # (Nh, Nm): mean pointwise distance between every window pair
    d = np.linalg.norm(hw[:, None, :, :] - mw[None, :, :, :], axis=-1).mean(axis=-1)
    # symmetrized so the metric does not depend on argument order
    return float(0.5 * (d.min(axis=1).mean() + d.min(axis=0).mean()))


def tde(model: Scanpath, human: Scanpath, m: int = DEFAULT_TDE_WINDOW) -> float:
    """Mean over length-m windows of one scanpath of the minimum mean
    pointwise distance to any window of the other, in pixels, averaged
    over both directions."""
    return _window_distance(model.positions(), human.positions(), m)


def stde(model: Scanpath, human: Scanpath, dims: tuple[int, int], m: int = DEFAULT_TDE_WINDOW) -> float:
    """Scale-free TDE similarity in [0, 1]: coordinates are normalized by
    the image size and the distance is mapped through exp(-d)."""
    scale = np.array(dims, dtype=float)
    d = _window_distance(model.positions() / scale, human.positions() / scale, m)
    return float(np.exp(-d))


def nss(saliency: GrayMap, fixations) -> float:
    """Mean standardized saliency at fixation pixels (nearest-pixel lookup)."""
    points = np.atleast_2d(np.asarray(fixations, dtype=float))
    if points.size == 0:
        raise ValueError("nss requires at least one fixation")
    std = float(saliency.std())
    if std < 1e-12 * max(1.0, float(np.abs(saliency).max())):
        raise ValueError("nss is undefined for a zero-variance saliency map")
    z = (saliency - saliency.mean()) / std
    h, w = saliency.shape
    cols = np.clip(np.rint(points[:, 0]).astype(int), 0, w - 1)
    rows = np.clip(np.rint(points[:, 1]).astype(int), 0, h - 1)
    return float(z[rows, cols].mean())


@dataclass(frozen=True)
class ImageScores:
    image_id: str
    sed: float
    tde: float
    stde: float


@dataclass(frozen=True)
class EvalReport:
    """Per-image metric rows plus their mean/std aggregate."""

    per_image: tuple[ImageScores, ...]
    aggregate: dict[str, tuple[float, float]]
    config_snapshot: dict = field(default_factory=dict)
    skipped: tuple[str, ...] = ()

    def __post_init__(self):
        recomputed = _aggregate(self.per_image)
        for name, (mean, std) in recomputed.items():
            got = self.aggregate.get(name)
            if got is None or not (np.isclose(got[0], mean) and np.isclose(got[1], std)):
                raise ValueError(f"aggregate for {name!r} does not match per-image rows")


def _aggregate(rows) -> dict[str, tuple[float, float]]:
    out = {}
    for name in ("sed", "tde", "stde"):
        vals = np.array([getattr(r, name) for r in rows], dtype=float)
        if vals.size == 0:
            out[name] = (float("nan"), float("nan"))
        else:
            out[name] = (float(vals.mean()), float(vals.std()))
    return out


def build_report(rows, config_snapshot: dict | None = None, skipped=()) -> EvalReport:
    rows = tuple(rows)
    return EvalReport(rows, _aggregate(rows), dict(config_snapshot or {}), tuple(skipped))


def score_against_humans(
    model: Scanpath,
    humans,
    dims: tuple[int, int],
    sed_grid: int = DEFAULT_SED_GRID,
    tde_window: int = DEFAULT_TDE_WINDOW,
) -> tuple[float, float, float]:
    """Average each metric over all human scanpaths of one image.

    Subject scanpaths too short for a metric (empty for SED, fewer than
    tde_window fixations for TDE/STDE) are left out of that metric's mean;
    an image where no subject is usable raises ValueError.
    """
    seds, tdes, stdes = [], [], []
    for human in humans:
        if len(human) > 0 and len(model) > 0:
            seds.append(sed(model, human, dims, sed_grid))
        if len(human) >= tde_window and len(model) >= tde_window:
            tdes.append(tde(model, human, tde_window))
            stdes.append(stde(model, human, dims, tde_window))
    if not seds or not tdes:
        raise ValueError("no human scanpath long enough to score against")
    return float(np.mean(seds)), float(np.mean(tdes)), float(np.mean(stdes))


def report_to_dict(report: EvalReport) -> dict:
    return {
        "per_image": [
            {"image": r.image_id, "sed": r.sed, "tde": r.tde, "stde": r.stde} for r in report.per_image
        ],
        "aggregate": {k: {"mean": v[0], "std": v[1]} for k, v in report.aggregate.items()},
        "skipped": list(report.skipped),
        "config": report.config_snapshot,
    }


def report_table(report: EvalReport, model: str = "", mode: str = "") -> str:
    """One-row table in the `mean (std)` cell style."""
    header = ["Model", "Pre-attentive maps", "SED", "TDE", "STDE"]
    cells = [model or "-", mode or "-"]
    for name in ("sed", "tde", "stde"):
        mean, std = report.aggregate[name]
        cells.append(f"{mean:.2f} ({std:.2f})")
    widths = [max(len(h), len(c)) for h, c in zip(header, cells)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)),
        "  ".join(c.ljust(w) for c, w in zip(cells, widths)),
    ]
    return "\n".join(lines) + "\n"
