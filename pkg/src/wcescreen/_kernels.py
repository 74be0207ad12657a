"""Compiled per-pixel loops for the per-frame hot path.

Each kernel is a straight transcription of the formula documented on its
public wrapper; wrappers live in ``colorspace``, ``features`` and ``saliency``.
"""

import numpy as np
from numba import njit


def _hsv_tables():
    """Lookup tables replacing the integer divisions of the HSV binning.

    ``sv[delta, mx]`` holds ``s_bin * 10 + v_bin``; ``hue[sector, diff + 255,
    delta]`` holds ``h_bin * 100`` where ``sector`` is 0/1/2 for a red/green/blue
    maximum and ``diff`` the matching channel difference.
    """
    mx = np.arange(256)[None, :]
    delta = np.arange(256)[:, None]
    s_bin = np.where(mx == 0, 0, np.minimum((10 * delta) // np.maximum(mx, 1), 9))
    v_bin = np.minimum((10 * mx) // 255, 9)
    sv = (s_bin * 10 + v_bin).astype(np.int16)

    diff = np.arange(-255, 256)[:, None]
    d = np.arange(256)[None, :]
    safe = np.maximum(d, 1)
    hue = np.zeros((3, 511, 256), dtype=np.int16)
    hue6 = (np.mod(diff, 6 * safe), 2 * d + diff, 4 * d + diff)
    for sector in range(3):
        hb = np.minimum((5 * hue6[sector]) // (3 * safe), 9)
        valid = (np.abs(diff) <= d) & (d > 0)
        hue[sector] = np.where(valid, hb * 100, 0)
    return sv, hue


HSV_SV_TABLE, HSV_HUE_TABLE = _hsv_tables()


@njit(cache=True, nogil=True)
def hsv_counts(pixels, min_max_value, sv_table, hue_table):
    """Joint 10x10x10 HSV bin counts; returns ``(counts[1000], n_counted)``.

    Pixels whose max channel is below ``min_max_value`` are skipped.
    """
    h, w, _ = pixels.shape
    counts = np.zeros(1000, dtype=np.int64)
    n = 0
    for i in range(h):
        for j in range(w):
            r = np.int64(pixels[i, j, 0])
            g = np.int64(pixels[i, j, 1])
            b = np.int64(pixels[i, j, 2])
            mx = max(r, g, b)
            if mx < min_max_value:
                continue
            delta = mx - min(r, g, b)
            if mx == r:
                hb = hue_table[0, g - b + 255, delta]
            elif mx == g:
                hb = hue_table[1, b - r + 255, delta]
            else:
                hb = hue_table[2, r - g + 255, delta]
            counts[hb + sv_table[delta, mx]] += 1
            n += 1
    return counts, n


@njit(cache=True, nogil=True)
def rgb_to_xyzn(pixels, linear_lut, m):
    """Linearise sRGB through ``linear_lut`` and apply the 3x3 ``m``; ``(3, H, W)``."""
    h, w, _ = pixels.shape
    out = np.empty((3, h, w))
    for i in range(h):
        for j in range(w):
            r = linear_lut[pixels[i, j, 0]]
            g = linear_lut[pixels[i, j, 1]]
            b = linear_lut[pixels[i, j, 2]]
            out[0, i, j] = m[0, 0] * r + m[0, 1] * g + m[0, 2] * b
            out[1, i, j] = m[1, 0] * r + m[1, 1] * g + m[1, 2] * b
            out[2, i, j] = m[2, 0] * r + m[2, 1] * g + m[2, 2] * b
    return out


@njit(cache=True, nogil=True)
def lab_from_cbrt(xyzn, cbrt_xyzn, eps, kappa):
    """Finish CIELAB given white-normalised XYZ and its elementwise cube root."""
    _, h, w = xyzn.shape
    out = np.empty((3, h, w))
    for i in range(h):
        for j in range(w):
            fx = cbrt_xyzn[0, i, j]
            fy = cbrt_xyzn[1, i, j]
            fz = cbrt_xyzn[2, i, j]
            if xyzn[0, i, j] <= eps:
                fx = (kappa * xyzn[0, i, j] + 16.0) / 116.0
            if xyzn[1, i, j] <= eps:
                fy = (kappa * xyzn[1, i, j] + 16.0) / 116.0
            if xyzn[2, i, j] <= eps:
                fz = (kappa * xyzn[2, i, j] + 16.0) / 116.0
            out[0, i, j] = 116.0 * fy - 16.0
            out[1, i, j] = 500.0 * (fx - fy)
            out[2, i, j] = 200.0 * (fy - fz)
    return out


@njit(cache=True, nogil=True)
def diff_norm(a, b):
    """Per-pixel Euclidean norm over the leading channel axis of ``a - b``."""
    c, h, w = a.shape
    out = np.empty((h, w))
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for ch in range(c):
                d = a[ch, i, j] - b[ch, i, j]
                acc += d * d
            out[i, j] = np.sqrt(acc)
    return out
