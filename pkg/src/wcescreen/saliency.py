"""Lab centre-surround saliency, mean+std binarisation and salient-block selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .colorspace import gaussian_filter, rgb_to_lab_image, rgb_to_luma_image


@dataclass(frozen=True)
class BinaryMask:
    bits: np.ndarray  # (H, W) bool
    threshold_used: float

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


@dataclass(frozen=True)
class Block:
    """Half-open pixel rectangle ``[x1, x2) x [y1, y2)``."""

    x1: int
    y1: int
    x2: int
    y2: int

    def as_list(self) -> list[int]:
        return [self.x1, self.y1, self.x2, self.y2]


def saliency_from_lab(lab: np.ndarray, sigma: float = 1.0) -> np.ndarray:
    """Per-pixel Euclidean norm of (channel - blurred channel) over L, a, b.

    ``lab`` is a ``(3, H, W)`` stack.
    """
    lab = np.ascontiguousarray(lab, dtype=np.float64)
    return _kernels.diff_norm(lab, gaussian_filter(lab, sigma))


def saliency_map(pixels: np.ndarray, sigma: float = 1.0) -> np.ndarray:
    """Saliency map of an ``(H, W, 3)`` uint8 RGB frame; same height and width."""
    pixels = np.asarray(pixels)
    if pixels.size == 0:
        raise ValueError("cannot compute saliency of an empty frame")
    return saliency_from_lab(rgb_to_lab_image(pixels), sigma)


def binarize(smap: np.ndarray) -> BinaryMask:
    """Mark pixels strictly above mean + population std of the map."""
    smap = np.asarray(smap, dtype=np.float64)
    lo, hi = smap.min(), smap.max()
    if lo == hi:
        # Constant map: std is 0 by definition; avoid rounding noise in mean().
        return BinaryMask(np.zeros(smap.shape, dtype=bool), float(hi))
    threshold = float(smap.mean() + smap.std())
    return BinaryMask(smap > threshold, threshold)


def tile_counts(mask: BinaryMask, block_size: int) -> np.ndarray:
    """Salient-pixel count per full tile; partial edge tiles are dropped."""
    if block_size < 1:
        raise ValueError(f"block_size must be >= 1, got {block_size}")
    rows = mask.height // block_size
    cols = mask.width // block_size
    bits = mask.bits[: rows * block_size, : cols * block_size]
    return bits.reshape(rows, block_size, cols, block_size).sum(axis=(1, 3))


def top_blocks(mask: BinaryMask, block_size: int = 40, k: int = 3) -> list[Block]:
    """The ``k`` grid tiles with the most salient pixels, ties in raster order."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    counts = tile_counts(mask, block_size)
    if counts.size < k:
        raise ValueError(
            f"a {mask.width}x{mask.height} frame has {counts.size} tiles of "
            f"{block_size}px, fewer than k={k}"
        )
    cols = counts.shape[1]
    order = np.argsort(-counts.ravel(), kind="stable")[:k]
    blocks = []
    for idx in order:
        r, c = divmod(int(idx), cols)
        blocks.append(Block(c * block_size, r * block_size, (c + 1) * block_size, (r + 1) * block_size))
    return blocks


def salient_blocks(pixels: np.ndarray, sigma: float = 1.0, block_size: int = 40, k: int = 3) -> list[Block]:
    return top_blocks(binarize(saliency_map(pixels, sigma)), block_size, k)


def extract_blocks(pixels: np.ndarray, blocks: list[Block]) -> np.ndarray:
    """Luma of each rectangle, stacked into a ``(k, bh, bw)`` float array."""
    pixels = np.asarray(pixels)
    h, w = pixels.shape[:2]
    out = []
    for b in blocks:
        if not (0 <= b.x1 < b.x2 <= w and 0 <= b.y1 < b.y2 <= h):
            raise ValueError(f"block {b.as_list()} lies outside a {w}x{h} frame")
        out.append(rgb_to_luma_image(pixels[b.y1 : b.y2, b.x1 : b.x2]))
    return np.stack(out)
