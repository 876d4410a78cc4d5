"""Center-surround saliency pipeline (intensity, color opponency, orientation).

Nine-level Gaussian pyramids are built over an internally upscaled copy of
the frame; feature maps are across-scale differences between center levels
{2, 3, 4} and surround levels {c+3, c+4}. Each map passes through a
peak-promotion normalization before the three conspicuity channels are
averaged into a single map, returned at the frame's resolution with its
peak scaled to 1.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .features import gabor_kernel
from .imaging import Frame, GrayMap, gaussian_pyramid, resize_bilinear, resize_map

NUM_LEVELS = 9
CENTER_LEVELS = (2, 3, 4)
SURROUND_DELTAS = (3, 4)
OUTPUT_LEVEL = 4  # common scale for across-scale sums
MIN_BASE_DIM = 1024  # keeps the coarsest of 9 pyramid levels at >= 4x4

_PYR_GABOR_WAVELENGTH = 7.0
_PYR_GABOR_SIGMA = 2.3
_ANGLES = (0.0, 45.0, 90.0, 135.0)

_FLAT_EPS = 1e-12


def normalize_map(m: GrayMap) -> GrayMap:
    """Itti's N(.): rescale to [0, 1] and weight by (1 - mbar)^2, where mbar
    averages the local maxima other than one instance of the global peak.
    Flat maps (no structure above floating noise) collapse to zero."""
    lo = float(m.min())
    hi = float(m.max())
    if hi - lo < _FLAT_EPS * max(1.0, abs(hi)):
        return np.zeros_like(m)
    m = (m - lo) / (hi - lo)
    is_peak = m == ndimage.maximum_filter(m, size=3, mode="reflect")
    vals = m[is_peak]
    vals = vals[vals > 0.0]  # plateaus at the rescaled minimum carry no signal
    if vals.size > 1:
        mbar = (vals.sum() - 1.0) / (vals.size - 1)
    else:
        mbar = 0.0
    return m * (1.0 - mbar) ** 2


def center_surround(center: GrayMap, surround: GrayMap) -> GrayMap:
    """Across-scale difference: surround upsampled to the center grid."""
    h, w = center.shape
    return np.abs(center - resize_map(surround, w, h))


def _color_opponents(pixels: np.ndarray) -> tuple[GrayMap, GrayMap, GrayMap, GrayMap]:
    r, g, b = pixels[:, :, 0], pixels[:, :, 1], pixels[:, :, 2]
    intensity = (r + g + b) / 3.0
    peak = intensity.max()
    mask = intensity > 0.1 * peak if peak > 0 else np.zeros_like(intensity, dtype=bool)
    rn = np.divide(r, intensity, out=np.zeros_like(r), where=mask)
    gn = np.divide(g, intensity, out=np.zeros_like(g), where=mask)
    bn = np.divide(b, intensity, out=np.zeros_like(b), where=mask)
    red = np.maximum(rn - (gn + bn) / 2.0, 0.0)
    green = np.maximum(gn - (rn + bn) / 2.0, 0.0)
    blue = np.maximum(bn - (rn + gn) / 2.0, 0.0)
    yellow = np.maximum((rn + gn) / 2.0 - np.abs(rn - gn) / 2.0 - bn, 0.0)
    return red, green, blue, yellow


def _scale_sum(maps: list[GrayMap], shape: tuple[int, int]) -> GrayMap:
    h, w = shape
    out = np.zeros(shape)
    for m in maps:
        out += resize_map(m, w, h)
    return out


def saliency_map(f: Frame) -> GrayMap:
    """Non-negative saliency of a frame, peak-normalized to 1 (all-zero for
    structureless input), at the frame's own resolution."""
    base = f.pixels
    min_dim = min(f.width, f.height)
    if min_dim < MIN_BASE_DIM:
        scale = MIN_BASE_DIM / min_dim
        w = int(round(f.width * scale))
        h = int(round(f.height * scale))
        base = resize_bilinear(f, w, h).pixels

    intensity = base.mean(axis=2)
    i_pyr = gaussian_pyramid(intensity, NUM_LEVELS)
    color_pyrs = [gaussian_pyramid(c, NUM_LEVELS) for c in _color_opponents(base)]

    used = sorted({lvl for c in CENTER_LEVELS for lvl in (c, c + SURROUND_DELTAS[0], c + SURROUND_DELTAS[1])})
    orient_pyrs = {}
    for angle in _ANGLES:
        kernel = gabor_kernel(angle, _PYR_GABOR_WAVELENGTH, _PYR_GABOR_SIGMA)
        orient_pyrs[angle] = {lvl: ndimage.convolve(i_pyr[lvl], kernel, mode="reflect") for lvl in used}

    out_shape = i_pyr[OUTPUT_LEVEL].shape
    pairs = [(c, c + d) for c in CENTER_LEVELS for d in SURROUND_DELTAS]

    intensity_cs = [normalize_map(center_surround(i_pyr[c], i_pyr[s])) for c, s in pairs]
    intensity_consp = _scale_sum(intensity_cs, out_shape)

    red_p, green_p, blue_p, yellow_p = color_pyrs
    color_cs = []
    for c, s in pairs:
        rg = center_surround(red_p[c] - green_p[c], green_p[s] - red_p[s])
        by = center_surround(blue_p[c] - yellow_p[c], yellow_p[s] - blue_p[s])
        color_cs.append(normalize_map(rg) + normalize_map(by))
    color_consp = _scale_sum(color_cs, out_shape)

    orient_consp = np.zeros(out_shape)
    for angle in _ANGLES:
        per_angle = [normalize_map(center_surround(orient_pyrs[angle][c], orient_pyrs[angle][s])) for c, s in pairs]
        orient_consp += normalize_map(_scale_sum(per_angle, out_shape))

    combined = (normalize_map(intensity_consp) + normalize_map(color_consp) + normalize_map(orient_consp)) / 3.0
    out = np.maximum(resize_map(combined, f.width, f.height), 0.0)
    peak = out.max()
    if peak > 0:
        out = out / peak
    return out
