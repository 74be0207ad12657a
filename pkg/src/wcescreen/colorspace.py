"""Pixel colour conversions and Gaussian filtering.

Scalar functions operate on single 8-bit RGB triples and are the reference
definitions; the ``*_image`` variants are the vectorised equivalents used by
the pipeline on ``(H, W, 3)`` uint8 arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np

from . import _kernels

# sRGB primaries, D65 white.
SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
D65_WHITE = (0.95047, 1.0, 1.08883)

LAB_EPSILON = 216.0 / 24389.0
LAB_KAPPA = 24389.0 / 27.0

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class HsvPixel:
    h: float
    s: float
    v: float


@dataclass(frozen=True)
class LabPixel:
    L: float
    a: float
    b: float


def _srgb_linearize(c: float) -> float:
    c = c / 255.0
    if c <= 0.04045:
        return c / 12.92
    return ((c + 0.055) / 1.055) ** 2.4


def _lab_f(t: float) -> float:
    if t > LAB_EPSILON:
        return t ** (1.0 / 3.0)
    return (LAB_KAPPA * t + 16.0) / 116.0


def rgb_to_hsv(r: int, g: int, b: int) -> HsvPixel:
    """Hexcone HSV with hue in degrees; hue is 0 for achromatic pixels."""
    mx = max(r, g, b)
    mn = min(r, g, b)
    delta = mx - mn
    v = mx / 255.0
    s = delta / mx if mx > 0 else 0.0
    if delta == 0:
        h = 0.0
    elif mx == r:
        h = (60.0 * (g - b) / delta) % 360.0
    elif mx == g:
        h = 60.0 * (b - r) / delta + 120.0
    else:
        h = 60.0 * (r - g) / delta + 240.0
    return HsvPixel(h, s, v)


def rgb_to_lab(r: int, g: int, b: int) -> LabPixel:
    lin = np.array([_srgb_linearize(r), _srgb_linearize(g), _srgb_linearize(b)])
    x, y, z = SRGB_TO_XYZ @ lin
    fx = _lab_f(x / D65_WHITE[0])
    fy = _lab_f(y / D65_WHITE[1])
    fz = _lab_f(z / D65_WHITE[2])
    return LabPixel(float(116.0 * fy - 16.0), float(500.0 * (fx - fy)), float(200.0 * (fy - fz)))


def rgb_to_luma(r: float, g: float, b: float) -> float:
    return LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b


# Lookup table: 8-bit sRGB code -> linear intensity.
_LINEAR_LUT = np.array([_srgb_linearize(c) for c in range(256)])
# XYZ is divided by the white point up front so the channels feed f() directly.
_RGB_TO_XYZN = SRGB_TO_XYZ / np.array(D65_WHITE)[:, None]


def rgb_to_lab_image(pixels: np.ndarray) -> np.ndarray:
    """Convert an ``(H, W, 3)`` uint8 image to a float64 ``(3, H, W)`` Lab stack."""
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    xyzn = _kernels.rgb_to_xyzn(pixels, _LINEAR_LUT, _RGB_TO_XYZN)
    return _kernels.lab_from_cbrt(xyzn, np.cbrt(xyzn), LAB_EPSILON, LAB_KAPPA)


def rgb_to_luma_image(pixels: np.ndarray) -> np.ndarray:
    p = pixels.astype(np.float64)
    return LUMA_WEIGHTS[0] * p[..., 0] + LUMA_WEIGHTS[1] * p[..., 1] + LUMA_WEIGHTS[2] * p[..., 2]


def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    """Normalised 1-D Gaussian taps with radius ``ceil(3 * sigma)``.

    The 2-D kernel ``G(x, y)`` is the outer product of this vector with itself;
    the ``1 / (2 pi sigma^2)`` factor cancels under normalisation.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return w / w.sum()


def gaussian_filter(field: np.ndarray, sigma: float) -> np.ndarray:
    """Blur a 2-D field (or a stack of fields on the last two axes).

    Borders are handled by edge replication; output shape equals input shape.
    """
    w = gaussian_kernel_1d(sigma)
    field = np.asarray(field, dtype=np.float64)
    if field.ndim == 2:
        return cv2.sepFilter2D(field, cv2.CV_64F, w, w, borderType=cv2.BORDER_REPLICATE)
    flat = field.reshape((-1,) + field.shape[-2:])
    out = np.stack([cv2.sepFilter2D(f, cv2.CV_64F, w, w, borderType=cv2.BORDER_REPLICATE) for f in flat])
    return out.reshape(field.shape)
