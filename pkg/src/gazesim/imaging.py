"""Raster containers and low-level image operations.

Conventions used throughout the package:

* images and maps are float64 numpy arrays indexed ``[row, col]``;
* a ``GrayMap`` is a ``(H, W)`` scalar array, a ``VectorField`` is a
  ``(H, W, 2)`` array with ``[..., 0]`` the x (column) component and
  ``[..., 1]`` the y (row) component;
* positions are ``(x, y)`` in pixel units, pixel centers at integer
  coordinates, so the retina rectangle is ``[0, W-1] x [0, H-1]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import DataError

# Type aliases for raster payloads; both are float64 ndarrays.
GrayMap = np.ndarray
VectorField = np.ndarray

MIN_DIM = 16


@dataclass(frozen=True)
class Frame:
    """An RGB raster with values in [0, 1], shape (H, W, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3:
            raise ValueError(f"frame must have shape (H, W, 3), got {p.shape}")
        if p.shape[0] < MIN_DIM or p.shape[1] < MIN_DIM:
            raise ValueError(f"frame smaller than {MIN_DIM}px: {p.shape[1]}x{p.shape[0]}")
        if not np.isfinite(p).all():
            raise ValueError("frame contains non-finite values")
        if p.min() < 0.0 or p.max() > 1.0:
            raise ValueError("frame values must lie in [0, 1]")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def channel(self, j: int) -> GrayMap:
        return self.pixels[:, :, j]


def load_image(path) -> Frame:
    """Load a PNG/JPEG/BMP file into a Frame with values scaled to [0, 1]."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"image file not found: {path}")
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            arr = np.asarray(rgb, dtype=np.float64) / 255.0
    except UnidentifiedImageError as exc:
        raise DataError(f"unsupported image format: {path}") from exc
    except OSError as exc:
        raise DataError(f"corrupt or unreadable image: {path} ({exc})") from exc
    return Frame(arr)


def _bilinear_resize(arr: np.ndarray, w: int, h: int) -> np.ndarray:
    """Bilinear resize of a (H, W) or (H, W, C) array, pixel-center aligned.

    Uses the lerp-via-difference form so constant inputs are reproduced
    exactly and same-size resizes are identities.
    """
    src_h, src_w = arr.shape[:2]
    sx = (np.arange(w) + 0.5) * (src_w / w) - 0.5
    sy = (np.arange(h) + 0.5) * (src_h / h) - 0.5
    sx = np.clip(sx, 0.0, src_w - 1.0)
    sy = np.clip(sy, 0.0, src_h - 1.0)
    x0 = np.floor(sx).astype(int)
    y0 = np.floor(sy).astype(int)
    x1 = np.minimum(x0 + 1, src_w - 1)
    y1 = np.minimum(y0 + 1, src_h - 1)
    wx = sx - x0
    wy = sy - y0

    if arr.ndim == 3:
        wx = wx[:, None]
    top = arr[np.ix_(y0, x0)] + wx * (arr[np.ix_(y0, x1)] - arr[np.ix_(y0, x0)])
    bot = arr[np.ix_(y1, x0)] + wx * (arr[np.ix_(y1, x1)] - arr[np.ix_(y1, x0)])
    wyc = wy[:, None, None] if arr.ndim == 3 else wy[:, None]
    return top + wyc * (bot - top)


def resize_bilinear(f: Frame, w: int, h: int) -> Frame:
    """Resize a frame with bilinear interpolation; values stay in [0, 1]."""
    if w < MIN_DIM or h < MIN_DIM:
        raise ValueError(f"target size {w}x{h} below minimum {MIN_DIM}")
    if w == f.width and h == f.height:
        return f
    out = np.clip(_bilinear_resize(f.pixels, w, h), 0.0, 1.0)
    return Frame(out)


def resize_map(g: GrayMap, w: int, h: int) -> GrayMap:
    """Bilinear resize of a scalar map (same convention as resize_bilinear)."""
    if g.shape == (h, w):
        return g
    return _bilinear_resize(g, w, h)


def spatial_gradient(g: GrayMap) -> VectorField:
    """Per-pixel gradient: central differences inside, one-sided at borders."""
    dy, dx = np.gradient(g)
    return np.stack([dx, dy], axis=-1)


def gaussian_blur(g: GrayMap, sigma: float) -> GrayMap:
    """Separable Gaussian filter with reflective borders.

    The kernel is cut at 3.5 sigma: the extra half sigma over the usual 3
    keeps repeated blurs consistent with a single wider blur to ~1e-5 RMS.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return ndimage.gaussian_filter(g, sigma=sigma, mode="reflect", truncate=3.5)


def _downsample2(g: GrayMap) -> GrayMap:
    # 2x2 mean pooling (odd trailing row/col dropped); commutes with
    # mirroring for even sizes, which keeps pyramids reflection-equivariant.
    h2, w2 = g.shape[0] // 2, g.shape[1] // 2
    g = g[: 2 * h2, : 2 * w2]
    return 0.25 * (g[0::2, 0::2] + g[1::2, 0::2] + g[0::2, 1::2] + g[1::2, 1::2])


def gaussian_pyramid(g: GrayMap, levels: int) -> list[GrayMap]:
    """Multi-scale stack: level 0 is the input, each next level is blurred
    and downsampled by 2. The coarsest level must end up at least 4x4."""
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    coarse_h = g.shape[0] // (2 ** (levels - 1))
    coarse_w = g.shape[1] // (2 ** (levels - 1))
    if levels > 1 and (coarse_h < 4 or coarse_w < 4):
        raise ValueError(
            f"{levels} levels on a {g.shape[1]}x{g.shape[0]} map would leave a "
            f"coarsest level of {coarse_w}x{coarse_h} (< 4x4)"
        )
    out = [g]
    for _ in range(levels - 1):
        out.append(_downsample2(gaussian_blur(out[-1], 1.0)))
    return out
