import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import helpers
from wcescreen.config import ClusterParams, ScreenParams
from wcescreen.frameio import FrameSequence
from wcescreen.hcluster import SimilarityCluster, window_partition
from wcescreen.pipeline import (
    PairScorer,
    WindowAnalysis,
    estimate_play_time,
    resolve_threads,
    screen_cluster,
    screen_grid,
    screen_sequence,
)

P = ScreenParams()


def const(v, size=80):
    return np.full((size, size, 3), v, np.uint8)


def test_identical_cluster_keeps_one():
    frames = {i: const(90) for i in range(6)}
    assert screen_cluster(SimilarityCluster(tuple(range(6))), frames, P) == {0}


def test_constant_100_vs_110_is_one_keyframe():
    frames = {0: const(100), 1: const(110)}
    scorer = PairScorer(frames, P)
    assert scorer.score(0, 1) == pytest.approx(1 - 0.995477, abs=1e-6)
    assert screen_cluster(SimilarityCluster((0, 1)), frames, P) == {0}


def test_black_vs_white_is_two_keyframes():
    frames = {3: const(0), 8: const(255)}
    assert screen_cluster(SimilarityCluster((3, 8)), frames, P) == {3, 8}


def test_zero_threshold_strictness():
    p = P.replace(t_ssim=0.0)
    a = const(120)
    b = a.copy()
    b[5, 5] = 121  # inside the first raster tile, which a constant frame selects
    frames = {0: a, 1: a.copy(), 2: b}
    assert screen_cluster(SimilarityCluster((0, 1, 2)), frames, p) == {0, 2}


def test_reference_mode_catches_slow_drift():
    rng = np.random.default_rng(1)
    base = helpers.textured(rng)
    pattern = helpers.textured(np.random.default_rng(2)) - np.array((170, 100, 80))
    frames = {k: helpers.u8(base + 0.08 * k * pattern) for k in range(8)}
    cluster = SimilarityCluster(tuple(range(8)))
    adjacent = screen_cluster(cluster, frames, P)
    reference = screen_cluster(cluster, frames, P.replace(compare_mode="reference"))
    assert adjacent == {0}
    assert len(reference) > 1 and 0 in reference


def test_cluster_members_must_exist():
    seq = FrameSequence.from_arrays([const(1), const(2)])
    with pytest.raises(ValueError):
        screen_cluster(SimilarityCluster((0, 5)), seq, P)


def test_identical_sequence_single_window():
    seq = FrameSequence.from_arrays([const(77)] * 40)
    r = screen_sequence(seq, P.replace(cluster=ClusterParams(window_n=64)))
    assert r.keyframe_ids == (0,)
    assert 1 - r.n_key / r.total_frames == pytest.approx(1 - 1 / 40)


def test_identical_sequence_one_keyframe_per_window():
    seq = FrameSequence.from_arrays([const(77)] * 1000)
    r = screen_sequence(seq)
    assert r.n_key == math.ceil(1000 / 64)
    assert r.keyframe_ids == tuple(range(0, 1000, 64))


def test_alternating_colours_two_keyframes():
    red = np.zeros((80, 80, 3), np.uint8)
    red[..., 0] = 255
    blue = np.zeros((80, 80, 3), np.uint8)
    blue[..., 2] = 255
    seq = FrameSequence.from_arrays([red if i % 2 == 0 else blue for i in range(30)])
    r = screen_sequence(seq, P.replace(t1=0.5, cluster=ClusterParams(window_n=30)))
    assert r.keyframe_ids == (0, 1)


def test_seq_ids_pass_through():
    seq = FrameSequence.from_arrays([const(10), const(200), const(200)], start=5)
    r = screen_sequence(seq)
    assert set(r.keyframe_ids) <= {5, 6, 7} and 5 in r.keyframe_ids


def test_empty_sequence_rejected():
    with pytest.raises(ValueError):
        screen_sequence(FrameSequence.from_arrays([]))


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.integers(2, 30), st.sampled_from([0.2, 0.48, 0.9]))
def test_structural_contract(seed, window_n, t1):
    seq = helpers.graded_sequence(seed, scenes=2, repeats=12, size=40 * 2)
    p = P.replace(t1=t1, cluster=ClusterParams(window_n=window_n))
    r = screen_sequence(seq, p)
    assert r.keyframe_ids and set(r.keyframe_ids) <= set(seq.seq_ids)
    for w in window_partition(seq, window_n):
        wa = WindowAnalysis(w, p)
        kept = wa.keyframes(t1, p.t_ssim)
        assert len(kept) >= len(wa.clusters(t1))
        assert kept[0] == w.seq_ids[0]


@settings(max_examples=15)
@given(st.integers(0, 10_000), st.sampled_from(["adjacent", "reference"]))
def test_keyframes_non_increasing_in_t_ssim(seed, mode):
    seq = helpers.graded_sequence(seed, scenes=2, repeats=16)
    grid = [round(0.01 * i, 2) for i in range(1, 21)]
    counts = [screen_sequence(seq, P.replace(t_ssim=t, compare_mode=mode)).n_key for t in grid]
    if mode == "adjacent":
        assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert all(c >= 1 for c in counts)


def test_grid_matches_individual_runs():
    seq = helpers.graded_sequence(4, scenes=2, repeats=20)
    grid = [(0.3, 0.03), (0.3, 0.1), (0.8, 0.05)]
    for (t1, ts), r in zip(grid, screen_grid(seq, grid)):
        assert r == screen_sequence(seq, P.replace(t1=t1, t_ssim=ts))


def test_threads_do_not_change_result():
    seq = helpers.graded_sequence(9, scenes=3, repeats=30)
    p = P.replace(cluster=ClusterParams(window_n=16))
    assert screen_sequence(seq, p, threads=1) == screen_sequence(seq, p, threads=3)


def test_progress_counts_every_frame():
    seq = helpers.graded_sequence(2, scenes=1, repeats=20)
    seen = []
    screen_sequence(seq, P.replace(cluster=ClusterParams(window_n=6)), progress=seen.append)
    assert seen == [6, 6, 6, 2]


def test_resolve_threads(monkeypatch):
    monkeypatch.delenv("WCE_SCREEN_THREADS", raising=False)
    assert resolve_threads(None) == 1
    monkeypatch.setenv("WCE_SCREEN_THREADS", "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(2) == 2
    assert resolve_threads(0) >= 1
    with pytest.raises(ValueError):
        resolve_threads(-1)


def test_play_time():
    assert estimate_play_time(50218, 984.1) == pytest.approx(51.03, abs=0.01)
    assert estimate_play_time(0, 984.1) == 0
    assert estimate_play_time(18096, 984.1) == pytest.approx(18.39, abs=0.01)
    with pytest.raises(ValueError):
        estimate_play_time(10, 0)
