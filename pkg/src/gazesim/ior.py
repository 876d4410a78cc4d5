"""Inhibition of return.

The inhibition field relaxes toward a Gaussian bump centered on the
current focus: dI/dt + beta * I = beta * g(x - a). Between trajectory
samples the focus is held constant, which makes the update exact:
I' = I * exp(-beta * dt) + (1 - exp(-beta * dt)) * g(x - a).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import GrayMap


@dataclass(frozen=True)
class IorParams:
    beta: float = 0.1  # relaxation rate, 1/s
    sigma: float = 14.0  # footprint width, px (about 2 deg at the default scale)

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class InhibitionMap:
    """Suppression field with values in [0, 1]."""

    values: GrayMap

    def __post_init__(self):
        v = self.values
        if not np.isfinite(v).all():
            raise ValueError("inhibition map contains non-finite values")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("inhibition values must lie in [0, 1]")

    @classmethod
    def zeros(cls, height: int, width: int) -> "InhibitionMap":
        return cls(np.zeros((height, width)))


def gaussian_footprint(height: int, width: int, center, sigma: float) -> GrayMap:
    """g(x - a) = exp(-|x - a|^2 / (2 sigma^2)) on the pixel grid."""
    ys, xs = np.mgrid[0:height, 0:width]
    d2 = (xs - center[0]) ** 2 + (ys - center[1]) ** 2
    return np.exp(-d2 / (2.0 * sigma**2))


def ior_step(imap: InhibitionMap, a, dt: float, params: IorParams) -> InhibitionMap:
    """Advance the inhibition field by dt with the focus held at a.

    The update is a convex combination of the previous field and the
    Gaussian footprint, so values stay in [0, 1] for all time.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    h, w = imap.values.shape
    decay = np.exp(-params.beta * dt)
    g = gaussian_footprint(h, w, a, params.sigma)
    updated = imap.values * decay + (1.0 - decay) * g
    return InhibitionMap(np.clip(updated, 0.0, 1.0))
