"""Mean SSIM between grayscale blocks and the salient-block dissimilarity score."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

AGGREGATES = ("mean", "min")


@dataclass(frozen=True)
class SsimParams:
    window: int = 11
    window_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    L: float = 255.0
    aggregate: str = "mean"

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"ssim.window must be a positive odd integer, got {self.window}")
        if not self.window_sigma > 0:
            raise ValueError(f"ssim.window_sigma must be positive, got {self.window_sigma}")
        if not (self.k1 > 0 and self.k2 > 0):
            raise ValueError(f"ssim.k1/ssim.k2 must both be positive, got {self.k1}, {self.k2}")
        if not self.L > 0:
            raise ValueError(f"ssim.L must be positive, got {self.L}")
        if self.aggregate not in AGGREGATES:
            raise ValueError(f"ssim.aggregate must be one of {AGGREGATES}, got {self.aggregate!r}")

    @property
    def c1(self) -> float:
        return (self.k1 * self.L) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.L) ** 2


@lru_cache(maxsize=16)
def _window_taps(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    w /= w.sum()
    w.setflags(write=False)
    return w


def window_weights(p: SsimParams) -> np.ndarray:
    """Normalised 2-D Gaussian window (outer product of the 1-D taps)."""
    w = _window_taps(p.window, p.window_sigma)
    return np.outer(w, w)


def _valid_filter(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Separable weighted sum over the last two axes, valid positions only."""
    x = sliding_window_view(x, len(w), axis=-1) @ w
    return sliding_window_view(x, len(w), axis=-2) @ w


def ssim_maps(a: np.ndarray, b: np.ndarray, p: SsimParams) -> np.ndarray:
    """Local SSIM at every valid window position.

    ``a`` and ``b`` may carry leading batch axes; the window runs over the last
    two.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"block shapes differ: {a.shape} vs {b.shape}")
    if a.ndim < 2 or min(a.shape[-2:]) < p.window:
        raise ValueError(f"blocks of shape {a.shape[-2:]} are smaller than the {p.window}px window")
    w = _window_taps(p.window, p.window_sigma)
    stats = _valid_filter(np.stack([a, b, a * a, b * b, a * b]), w)
    mu_a, mu_b, e_aa, e_bb, e_ab = stats
    mu_aa = mu_a * mu_a
    mu_bb = mu_b * mu_b
    mu_ab = mu_a * mu_b
    var_a = e_aa - mu_aa
    var_b = e_bb - mu_bb
    cov = e_ab - mu_ab
    num = (2.0 * mu_ab + p.c1) * (2.0 * cov + p.c2)
    den = (mu_aa + mu_bb + p.c1) * (var_a + var_b + p.c2)
    return num / den


def mssim(a: np.ndarray, b: np.ndarray, p: SsimParams = SsimParams()) -> float:
    return float(ssim_maps(a, b, p).mean())


def block_dissimilarity(blocks_a: np.ndarray, blocks_b: np.ndarray, p: SsimParams = SsimParams()) -> float:
    """``1 - aggregate(mssim)`` over paired blocks; 0 for identical sets."""
    blocks_a = np.asarray(blocks_a)
    blocks_b = np.asarray(blocks_b)
    if blocks_a.shape != blocks_b.shape or blocks_a.ndim != 3 or len(blocks_a) == 0:
        raise ValueError(
            f"block sets must be equal-shaped (k, h, w) stacks, got {blocks_a.shape} and {blocks_b.shape}"
        )
    per_block = ssim_maps(blocks_a, blocks_b, p).mean(axis=(-2, -1))
    agg = per_block.min() if p.aggregate == "min" else per_block.mean()
    return float(1.0 - agg)
