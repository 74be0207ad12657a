"""End-to-end screening: window, cluster, then salient-block SSIM keyframe walk.

Work is organised per window. Everything that does not depend on the two
thresholds (histograms, the dendrogram, salient-block coordinates and pair
scores) is computed once by :class:`WindowAnalysis`, which the parameter sweep
reuses across grid points. Windows are independent, so they can be fanned out
to worker processes; results are merged in window order so output never
depends on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ._alloc import tune_allocator
from .config import ScreenParams
from .features import hsv_histogram
from .frameio import FrameSequence, ScreeningResult
from .hcluster import (
    Dendrogram,
    SimilarityCluster,
    build_dendrogram,
    cut_dendrogram,
    window_partition,
)
from .saliency import Block, extract_blocks, salient_blocks
from .ssim import block_dissimilarity

THREADS_ENV = "WCE_SCREEN_THREADS"


class PairScorer:
    """Memoised salient-block dissimilarity between frames of one window.

    ``score(ref, other)`` takes block coordinates from ``ref``'s saliency mask
    and compares the luma of both frames inside those blocks.
    """

    def __init__(self, pixels: Mapping[int, np.ndarray], params: ScreenParams):
        self.pixels = pixels
        self.params = params
        self._coords: dict[int, list[Block]] = {}
        self._ref_blocks: dict[int, np.ndarray] = {}
        self._scores: dict[tuple[int, int], float] = {}

    def coords(self, sid: int) -> list[Block]:
        if sid not in self._coords:
            sp = self.params.saliency
            self._coords[sid] = salient_blocks(self.pixels[sid], sp.sigma, sp.block_size, sp.k)
        return self._coords[sid]

    def score(self, ref: int, other: int) -> float:
        key = (ref, other)
        if key not in self._scores:
            coords = self.coords(ref)
            if ref not in self._ref_blocks:
                self._ref_blocks[ref] = extract_blocks(self.pixels[ref], coords)
            b = extract_blocks(self.pixels[other], coords)
            self._scores[key] = block_dissimilarity(self._ref_blocks[ref], b, self.params.ssim)
        return self._scores[key]


def screen_cluster(
    cluster: SimilarityCluster,
    frames: FrameSequence | Mapping[int, np.ndarray],
    params: ScreenParams,
    scorer: PairScorer | None = None,
) -> set[int]:
    """Keyframes of one similarity cluster.

    Members are walked in seq_id order and the first is always kept. In
    ``adjacent`` mode each member is compared with its predecessor; in
    ``reference`` mode with the most recently kept keyframe. A member is kept
    when its score exceeds ``params.t_ssim``.
    """
    members = sorted(cluster.member_ids)
    if not members:
        raise ValueError("cannot screen an empty cluster")
    if scorer is None:
        scorer = PairScorer(_pixel_map(frames, members), params)
    keep = {members[0]}
    ref = members[0]
    for prev, cur in zip(members, members[1:]):
        base = prev if params.compare_mode == "adjacent" else ref
        if scorer.score(base, cur) > params.t_ssim:
            keep.add(cur)
            ref = cur
    return keep


def _pixel_map(frames, wanted: Iterable[int]) -> Mapping[int, np.ndarray]:
    if isinstance(frames, Mapping):
        return frames
    index = {sid: i for i, sid in enumerate(frames.seq_ids)}
    try:
        return {sid: frames[index[sid]].pixels for sid in wanted}
    except KeyError as e:
        raise ValueError(f"cluster member {e.args[0]} is not in the frame sequence") from None


class WindowAnalysis:
    """Threshold-independent state of a single window."""

    def __init__(self, window: FrameSequence, params: ScreenParams):
        self.params = params
        self.seq_ids = window.seq_ids
        self.pixels = {f.seq_id: f.pixels for f in window}
        thr = params.features.mask_dark_threshold
        self.features = np.stack([hsv_histogram(self.pixels[s], thr) for s in self.seq_ids])
        self.dendrogram: Dendrogram = build_dendrogram(self.features, params.cluster.linkage, self.seq_ids)
        self.scorer = PairScorer(self.pixels, params)

    def clusters(self, t1: float) -> list[SimilarityCluster]:
        return cut_dendrogram(self.dendrogram, t1)

    def keyframes(self, t1: float, t_ssim: float) -> list[int]:
        params = self.params.replace(t1=t1, t_ssim=t_ssim)
        keep: set[int] = set()
        for cluster in self.clusters(t1):
            keep |= screen_cluster(cluster, self.pixels, params, self.scorer)
        return sorted(keep)


def _screen_window(window: FrameSequence, params: ScreenParams) -> list[int]:
    return WindowAnalysis(window, params).keyframes(params.t1, params.t_ssim)


def _sweep_window(window: FrameSequence, params: ScreenParams, grid: Sequence[tuple[float, float]]) -> list[list[int]]:
    wa = WindowAnalysis(window, params)
    return [wa.keyframes(t1, ts) for t1, ts in grid]


def resolve_threads(threads: int | None) -> int:
    """``None`` reads the environment; 0 means one worker per CPU."""
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    if threads < 0:
        raise ValueError(f"thread count must be >= 0, got {threads}")
    return threads or (os.cpu_count() or 1)


def map_windows(
    fn: Callable,
    windows: Sequence[FrameSequence],
    *args,
    threads: int | None = 1,
    progress: Callable[[int], None] | None = None,
) -> list:
    """Apply ``fn(window, *args)`` to every window, returning results in window order."""
    workers = min(resolve_threads(threads), max(len(windows), 1))
    results = []
    if workers <= 1:
        for w in windows:
            results.append(fn(w, *args))
            if progress:
                progress(len(w))
        return results
    with ProcessPoolExecutor(max_workers=workers, initializer=tune_allocator) as pool:
        futures = [pool.submit(fn, w, *args) for w in windows]
        for w, fut in zip(windows, futures):
            results.append(fut.result())
            if progress:
                progress(len(w))
    return results


def screen_sequence(
    frames: FrameSequence,
    params: ScreenParams = ScreenParams(),
    threads: int | None = 1,
    progress: Callable[[int], None] | None = None,
) -> ScreeningResult:
    if len(frames) == 0:
        raise ValueError("cannot screen an empty sequence")
    windows = window_partition(frames, params.window_n)
    per_window = map_windows(_screen_window, windows, params, threads=threads, progress=progress)
    keys = sorted(k for ks in per_window for k in ks)
    return ScreeningResult(tuple(keys), len(frames), params.t1, params.t_ssim, params.window_n)


def screen_grid(
    frames: FrameSequence,
    grid: Sequence[tuple[float, float]],
    params: ScreenParams = ScreenParams(),
    threads: int | None = 1,
    progress: Callable[[int], None] | None = None,
) -> list[ScreeningResult]:
    """Screen once per ``(t1, t_ssim)`` grid point, sharing per-window work."""
    if len(frames) == 0:
        raise ValueError("cannot screen an empty sequence")
    for t1, ts in grid:
        params.replace(t1=t1, t_ssim=ts)  # validates
    windows = window_partition(frames, params.window_n)
    per_window = map_windows(_sweep_window, windows, params, list(grid), threads=threads, progress=progress)
    out = []
    for g, (t1, ts) in enumerate(grid):
        keys = sorted(k for w in per_window for k in w[g])
        out.append(ScreeningResult(tuple(keys), len(frames), t1, ts, params.window_n))
    return out


def estimate_play_time(frame_count: int, rate_frames_per_minute: float) -> float:
    """Playback minutes for ``frame_count`` frames at a fixed display rate."""
    if not rate_frames_per_minute > 0:
        raise ValueError(f"play rate must be positive, got {rate_frames_per_minute}")
    return frame_count / rate_frames_per_minute
