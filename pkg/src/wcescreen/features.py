"""Joint 10x10x10 HSV colour histograms and distances between them."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist, squareform

from . import _kernels

N_LEVELS = 10
N_BINS = N_LEVELS**3


def hsv_histogram(pixels: np.ndarray, mask_dark_threshold: float | None = None) -> np.ndarray:
    """L1-normalised 1000-bin HSV histogram of an ``(H, W, 3)`` uint8 image.

    Each pixel lands in joint bin ``h_bin*100 + s_bin*10 + v_bin`` with
    ``h_bin = min(floor(h / 36), 9)``, ``s_bin = min(floor(10 s), 9)`` and
    ``v_bin = min(floor(10 v), 9)``. Bins are evaluated in integer arithmetic,
    so pixels exactly on an interval boundary (hue 36 deg, saturation 0.3)
    are assigned without rounding ambiguity.

    With ``mask_dark_threshold`` set, pixels whose value ``v = max/255`` is
    below the threshold are left out (for black vignette borders). A frame whose
    pixels are all masked yields the zero vector.
    """
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    if pixels.size == 0:
        raise ValueError("cannot build a histogram of a zero-pixel frame")
    min_mx = 0
    if mask_dark_threshold is not None:
        min_mx = next((m for m in range(256) if m / 255.0 >= mask_dark_threshold), 256)
    counts, n = _kernels.hsv_counts(pixels, min_mx, _kernels.HSV_SV_TABLE, _kernels.HSV_HUE_TABLE)
    hist = counts.astype(np.float64)
    if n:
        hist /= n
    return hist


def feature_distance(q1: np.ndarray, q2: np.ndarray) -> float:
    q1 = np.asarray(q1, dtype=np.float64)
    q2 = np.asarray(q2, dtype=np.float64)
    if q1.shape != q2.shape:
        raise ValueError(f"feature shapes differ: {q1.shape} vs {q2.shape}")
    d = q1 - q2
    return float(np.sqrt(np.dot(d, d)))


def pairwise_distances(features: np.ndarray) -> np.ndarray:
    """Square matrix of Euclidean distances between feature rows."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features[:, None]
    if len(features) < 2:
        return np.zeros((len(features), len(features)))
    return squareform(pdist(features, "euclidean"))



def save_feature_cache(path, seq_ids, features: np.ndarray) -> None:
    """Store per-frame histograms keyed by seq_id in an ``.npz`` archive.

    float64 values are written as raw binary, so a reload is bit-exact.
    """
    seq_ids = np.asarray(seq_ids, dtype=np.int64)
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape != (len(seq_ids), N_BINS):
        raise ValueError(f"expected ({len(seq_ids)}, {N_BINS}) features, got {features.shape}")
    if len(np.unique(seq_ids)) != len(seq_ids):
        raise ValueError("seq_ids in a feature cache must be unique")
    with open(path, "wb") as fh:
        np.savez(fh, seq_ids=seq_ids, features=features)


def load_feature_cache(path) -> dict[int, np.ndarray]:
    with np.load(path, allow_pickle=False) as z:
        ids, feats = z["seq_ids"], z["features"]
    if feats.shape != (len(ids), N_BINS):
        raise ValueError(f"feature cache {path} holds {feats.shape}, expected ({len(ids)}, {N_BINS})")
    return {int(i): feats[k] for k, i in enumerate(ids)}
