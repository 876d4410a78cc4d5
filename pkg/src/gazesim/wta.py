"""Winner-take-all baseline scanpath generator.

Repeatedly fixates the global maximum of the combined feature map and
hard-inhibits a disk around each selected location. The algorithm is
discrete; fixations get uniform synthetic durations so its output is
comparable with trajectory-derived scanpaths.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import Fixation, Scanpath
from .features import FeatureStack, combine_equal_weights

DEFAULT_INHIBITION_RADIUS = 15.0  # px, about 2 deg at the default pixels-per-degree


@dataclass(frozen=True)
class WtaConfig:
    inhibition_radius: float = DEFAULT_INHIBITION_RADIUS  # px
    num_fixations: int = 9
    fixation_duration: float = 1.0 / 3.0  # s, uniform timestamps

    def __post_init__(self):
        if self.inhibition_radius <= 0:
            raise ValueError(f"inhibition radius must be positive, got {self.inhibition_radius}")
        if self.num_fixations < 1:
            raise ValueError(f"need at least 1 fixation, got {self.num_fixations}")
        if self.fixation_duration <= 0:
            raise ValueError(f"fixation duration must be positive, got {self.fixation_duration}")


def wta_scanpath(stack: FeatureStack, cfg: WtaConfig) -> Scanpath:
    """Winner-take-all fixation sequence over the combined feature map.

    Ties at the maximum resolve in row-major order; an all-zero map (after
    too much inhibition) falls back to the map center with a warning.
    """
    working = combine_equal_weights(stack).copy()
    h, w = working.shape
    ys, xs = np.mgrid[0:h, 0:w]
    radius2 = cfg.inhibition_radius**2

    fixations = []
    duration = cfg.fixation_duration
    exhausted = False
    for k in range(cfg.num_fixations):
        if working.max() <= 0.0:
            warnings.warn(
                f"saliency exhausted after {k} fixations; emitting remaining fixations at the map center",
                RuntimeWarning,
                stacklevel=2,
            )
            exhausted = True
            cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
            for j in range(k, cfg.num_fixations):
                fixations.append(Fixation(cx, cy, j * duration, (j + 1) * duration))
            break
        flat_idx = int(np.argmax(working))  # first max in row-major order
        y, x = divmod(flat_idx, w)
        fixations.append(Fixation(float(x), float(y), k * duration, (k + 1) * duration))
        working[(xs - x) ** 2 + (ys - y) ** 2 <= radius2] = 0.0

    path = Scanpath(tuple(fixations))
    if not exhausted:
        _assert_spacing(path, cfg)
    return path


def _assert_spacing(path: Scanpath, cfg: WtaConfig) -> None:
    # Selections within the inhibited disk are impossible by construction.
    pos = path.positions()
    for i in range(1, len(pos)):
        d = float(np.hypot(*(pos[i] - pos[i - 1])))
        if d < cfg.inhibition_radius:
            raise AssertionError(f"consecutive fixations {i - 1},{i} only {d:.2f}px apart")
