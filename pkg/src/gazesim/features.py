"""Pre-attentive feature-strength maps.

Two configurations are supported: "basic" (8 maps: intensity-gradient
norm, 3 color-gradient norms, 4 oriented-edge maps) and "itti" (a single
center-surround saliency map, see :mod:`gazesim.itti`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imaging import Frame, GrayMap, spatial_gradient

BASIC_LABELS = ("intensity", "color_r", "color_g", "color_b", "orient_0", "orient_45", "orient_90", "orient_135")

GABOR_WAVELENGTH = 8.0  # px
GABOR_SIGMA = 4.0  # px
GABOR_ANGLES = (0.0, 45.0, 90.0, 135.0)  # degrees


@dataclass(frozen=True)
class FeatureStack:
    """Ordered set of non-negative feature maps sharing one raster grid."""

    maps: np.ndarray  # (N, H, W)
    labels: tuple[str, ...]
    mode: str  # "basic" | "itti" | "custom" (extension maps, any count)

    def __post_init__(self):
        if self.maps.ndim != 3 or self.maps.shape[0] < 1:
            raise ValueError(f"maps must be (N, H, W) with N >= 1, got shape {self.maps.shape}")
        if len(self.labels) != self.maps.shape[0]:
            raise ValueError("labels do not match number of maps")
        if self.mode not in ("basic", "itti", "custom"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "basic" and self.maps.shape[0] != 8:
            raise ValueError(f"basic mode requires 8 maps, got {self.maps.shape[0]}")
        if self.mode == "itti" and self.maps.shape[0] != 1:
            raise ValueError(f"itti mode requires 1 map, got {self.maps.shape[0]}")
        if not np.isfinite(self.maps).all():
            raise ValueError("feature maps contain non-finite values")
        if self.maps.min() < 0.0:
            raise ValueError("feature maps must be non-negative")

    @property
    def height(self) -> int:
        return self.maps.shape[1]

    @property
    def width(self) -> int:
        return self.maps.shape[2]


def intensity_map(f: Frame) -> GrayMap:
    """Brightness as the mean of the RGB channels."""
    return f.pixels.mean(axis=2)


def gradient_norm(g: GrayMap) -> GrayMap:
    grad = spatial_gradient(g)
    return np.hypot(grad[..., 0], grad[..., 1])


def intensity_feature(f: Frame) -> GrayMap:
    """Strength of the brightness gradient at each pixel."""
    return gradient_norm(intensity_map(f))


def color_features(f: Frame) -> list[GrayMap]:
    """Per-channel gradient-norm maps in channel order (R, G, B)."""
    return [gradient_norm(f.channel(j)) for j in range(3)]


def gabor_kernel(angle_deg: float, wavelength: float = GABOR_WAVELENGTH, sigma: float = GABOR_SIGMA) -> np.ndarray:
    """Even-symmetric zero-mean Gabor tuned to edges oriented at angle_deg.

    The cosine carrier runs across the edge direction, so a filter at 0
    degrees responds maximally to horizontal structure.
    """
    radius = int(np.ceil(3.0 * sigma))
    ys, xs = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    theta = np.deg2rad(angle_deg)
    across = -xs * np.sin(theta) + ys * np.cos(theta)
    kernel = np.exp(-(xs**2 + ys**2) / (2.0 * sigma**2)) * np.cos(2.0 * np.pi * across / wavelength)
    return kernel - kernel.mean()


def orientation_maps(f: Frame) -> list[GrayMap]:
    """Oriented-edge responses of the intensity at 0/45/90/135 degrees."""
    intensity = intensity_map(f)
    return [ndimage.convolve(intensity, gabor_kernel(a), mode="reflect") for a in GABOR_ANGLES]


def orientation_features(f: Frame) -> list[GrayMap]:
    """Gradient-norm maps of the four oriented-edge responses."""
    return [gradient_norm(o) for o in orientation_maps(f)]


def basic_stack(f: Frame) -> FeatureStack:
    """The 8-map stack: [intensity, R, G, B, 0deg, 45deg, 90deg, 135deg]."""
    maps = [intensity_feature(f)] + color_features(f) + orientation_features(f)
    return FeatureStack(np.stack(maps), BASIC_LABELS, "basic")


def itti_saliency(f: Frame) -> FeatureStack:
    """Single-map stack holding the center-surround saliency of the frame."""
    from .itti import saliency_map

    return FeatureStack(saliency_map(f)[None, :, :], ("saliency",), "itti")


def make_stack(f: Frame, mode: str) -> FeatureStack:
    if mode == "basic":
        return basic_stack(f)
    if mode == "itti":
        return itti_saliency(f)
    raise ValueError(f"unknown feature mode {mode!r}")


def combine_equal_weights(s: FeatureStack) -> GrayMap:
    """Per-pixel mean of all maps in the stack."""
    if s.maps.shape[0] == 0:
        raise ValueError("empty feature stack")
    return s.maps.mean(axis=0)
