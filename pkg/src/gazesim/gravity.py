"""Mass fields and the attraction field they generate.

The field kernel ``e(z) = z / (2 pi |z|^2)`` pulls toward mass with a
softened core (zero inside EPS_CORE pixels, which keeps the dynamics
well-posed when the focus sits on top of mass). The full field grid is
evaluated with zero-padded FFT convolution; direct summation is kept as
the test oracle.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .features import FeatureStack
from .imaging import GrayMap
from .ior import InhibitionMap

EPS_CORE = 0.5  # px; kernel is zero strictly inside this radius


@dataclass(frozen=True)
class GravityParams:
    """Per-feature gains and the global magnitude of the mass field."""

    alphas: tuple[float, ...] | None = None  # None: all features weighted 1
    global_gain: float = 1.0

    def __post_init__(self):
        if self.alphas is not None and any(a <= 0 for a in self.alphas):
            raise ValueError("all feature gains must be strictly positive")
        if self.global_gain <= 0:
            raise ValueError(f"global_gain must be positive, got {self.global_gain}")

    def resolved_alphas(self, n: int) -> np.ndarray:
        if self.alphas is None:
            return np.ones(n)
        if len(self.alphas) != n:
            raise ValueError(f"{len(self.alphas)} gains for {n} feature maps")
        return np.asarray(self.alphas, dtype=float)


@dataclass(frozen=True)
class MassField:
    """Non-negative attractor distribution on the retina grid."""

    values: GrayMap  # (H, W), >= 0
    cell_area: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.values).all():
            raise ValueError("mass field contains non-finite values")
        if self.values.min() < 0.0:
            raise ValueError("mass field must be non-negative")

    def content_hash(self) -> str:
        return hashlib.blake2b(np.ascontiguousarray(self.values).tobytes(), digest_size=8).hexdigest()


@dataclass(frozen=True)
class FieldGrid:
    """Attraction field sampled at every pixel center."""

    field: np.ndarray  # (H, W, 2): [..., 0] x component, [..., 1] y component
    source_hash: str = ""

    def __post_init__(self):
        if not np.isfinite(self.field).all():
            raise ValueError("field grid contains non-finite values")

    @property
    def height(self) -> int:
        return self.field.shape[0]

    @property
    def width(self) -> int:
        return self.field.shape[1]


def mass_from_features(stack: FeatureStack, params: GravityParams, inhibition: InhibitionMap) -> MassField:
    """Weighted feature sum modulated by inhibition:
    mu(x) = gain * sum_i alpha_i s_i(x) * (1 - I(x))."""
    inhib = inhibition.values
    if inhib.shape != stack.maps.shape[1:]:
        raise ValueError(f"inhibition shape {inhib.shape} does not match features {stack.maps.shape[1:]}")
    alphas = params.resolved_alphas(stack.maps.shape[0])
    weighted = np.tensordot(alphas, stack.maps, axes=(0, 0))
    return MassField(params.global_gain * weighted * (1.0 - inhib))


def kernel_e(z: np.ndarray) -> np.ndarray:
    """Attraction kernel z / (2 pi |z|^2), zero inside the softened core.

    Accepts a single 2-vector or any (..., 2) array of displacements.
    """
    z = np.asarray(z, dtype=float)
    r2 = np.sum(z * z, axis=-1, keepdims=True)
    out = np.zeros_like(z)
    good = r2 >= EPS_CORE**2
    np.divide(z, 2.0 * np.pi * r2, out=out, where=good)
    return out


def _pixel_grids(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0:h, 0:w]
    return xs.astype(float), ys.astype(float)


def field_at_point(mu: MassField, a) -> np.ndarray:
    """E(a) by direct summation over every pixel (the brute-force oracle)."""
    h, w = mu.values.shape
    ax = float(np.clip(a[0], 0.0, w - 1.0))
    ay = float(np.clip(a[1], 0.0, h - 1.0))
    xs, ys = _pixel_grids(h, w)
    dx = ax - xs
    dy = ay - ys
    r2 = dx * dx + dy * dy
    good = r2 >= EPS_CORE**2
    inv = np.zeros_like(r2)
    np.divide(mu.values * mu.cell_area, 2.0 * np.pi * r2, out=inv, where=good)
    return np.array([-(dx * inv).sum(), -(dy * inv).sum()])


@lru_cache(maxsize=8)
def _kernel_ffts(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    # Displacement kernels on the doubled grid, wraparound-indexed so the
    # zero-padded circular convolution reproduces the open-boundary sum.
    py = np.arange(2 * h)
    px = np.arange(2 * w)
    dy = np.where(py < h, py, py - 2 * h).astype(float)
    dx = np.where(px < w, px, px - 2 * w).astype(float)
    dxg, dyg = np.meshgrid(dx, dy)
    r2 = dxg * dxg + dyg * dyg
    good = r2 >= EPS_CORE**2
    kx = np.zeros_like(r2)
    ky = np.zeros_like(r2)
    np.divide(dxg, 2.0 * np.pi * r2, out=kx, where=good)
    np.divide(dyg, 2.0 * np.pi * r2, out=ky, where=good)
    return np.fft.rfft2(kx), np.fft.rfft2(ky)


def field_grid(mu: MassField) -> FieldGrid:
    """E sampled at every pixel via zero-padded FFT convolution of the mass
    with both kernel components; agrees with field_at_point to <= 1e-6."""
    h, w = mu.values.shape
    kx_hat, ky_hat = _kernel_ffts(h, w)
    padded = np.zeros((2 * h, 2 * w))
    padded[:h, :w] = mu.values * mu.cell_area
    mu_hat = np.fft.rfft2(padded)
    ex = -np.fft.irfft2(mu_hat * kx_hat, s=(2 * h, 2 * w))[:h, :w]
    ey = -np.fft.irfft2(mu_hat * ky_hat, s=(2 * h, 2 * w))[:h, :w]
    return FieldGrid(np.stack([ex, ey], axis=-1), mu.content_hash())


def field_interp(grid: FieldGrid, a) -> np.ndarray:
    """Bilinear interpolation of the field grid at a continuous position."""
    h, w = grid.height, grid.width
    ax = float(np.clip(a[0], 0.0, w - 1.0))
    ay = float(np.clip(a[1], 0.0, h - 1.0))
    x0, y0 = int(ax), int(ay)
    # collapse the cell on the far edges so pixel centers stay exact
    x1 = x0 + 1 if x0 < w - 1 else x0
    y1 = y0 + 1 if y0 < h - 1 else y0
    fx = ax - x0
    fy = ay - y0
    f = grid.field
    top = f[y0, x0] + fx * (f[y0, x1] - f[y0, x0])
    bot = f[y1, x0] + fx * (f[y1, x1] - f[y1, x0])
    return top + fy * (bot - top)


def log_potential(mu: MassField, a) -> float:
    """V(a) = (2 pi)^-1 sum_x log(max(|a - x|, EPS_CORE)) mu(x); the scalar
    potential whose negative gradient is the field away from kernel cores."""
    h, w = mu.values.shape
    xs, ys = _pixel_grids(h, w)
    r = np.hypot(a[0] - xs, a[1] - ys)
    return float((np.log(np.maximum(r, EPS_CORE)) * mu.values * mu.cell_area).sum() / (2.0 * np.pi))
