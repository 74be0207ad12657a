"""Acceptance criteria, one test each.

Every test records a one-line PASS/FAIL verdict with the measured numbers;
the lines are printed together at the end of the pytest session. Criteria
6 to 8 share one full-size synthetic case written by the ``synth`` command.
Set ``WCE_ACCEPT_SYNTH_DIR`` to reuse an existing directory written with default settings.
"""

import csv
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

import helpers
import oracles
from conftest import ACCEPTANCE_LINES, DATA
from wcescreen.config import ScreenParams
from wcescreen.features import hsv_histogram
from wcescreen.frameio import FrameSequence, load_annotations, load_sequence, read_manifest, write_manifest
from wcescreen.hcluster import LINKAGES, build_dendrogram, cut_dendrogram
from wcescreen.metrics import er_rate, evaluate, read_sweep_csv, subjective_reduction_ratio
from wcescreen.pipeline import estimate_play_time, screen_sequence
from wcescreen.saliency import saliency_map
from wcescreen.ssim import mssim
from wcescreen.synth import SynthSpec

RATE = 984.1
CASES = 200


def record(n: int, name: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[f"{n} {name}"] = f"[{'PASS' if ok else 'FAIL'}] {n}. {name}: {detail}"


def cli(*args, timeout=1800):
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "wcescreen", *map(str, args)], capture_output=True, text=True, timeout=timeout
    )
    return proc, time.perf_counter() - start


def test_1_published_case_parity():
    start = time.perf_counter()
    with open(DATA / "published_cases.csv") as fh:
        rows = list(csv.DictReader(fh))
    er_err = po_err = ps_err = 0.0
    ers = []
    for r in rows:
        o, k = int(r["original"]), int(r["keyframes"])
        er = er_rate(k, o)
        ers.append(er)
        er_err = max(er_err, abs(100 * er - float(r["er_rate_pct"])))
        po_err = max(po_err, abs(estimate_play_time(o, RATE) - float(r["play_original_min"])))
        ps_err = max(ps_err, abs(estimate_play_time(k, RATE) - float(r["play_screened_min"])))
    avg_er = 100 * sum(ers) / len(ers)
    avg_play = estimate_play_time(sum(int(r["keyframes"]) for r in rows) / len(rows), RATE)
    elapsed = time.perf_counter() - start
    ok = (
        len(rows) == 52
        and er_err <= 0.1
        and max(po_err, ps_err) <= 0.05
        and round(avg_er) == 76
        and round(avg_play) == 18
        and elapsed < 1.0
    )
    record(
        1,
        "published per-case arithmetic parity",
        ok,
        f"{len(rows)} rows, max ER error {er_err:.3f} pp, max play-time error {max(po_err, ps_err):.4f} min, "
        f"averages {avg_er:.2f}% / {avg_play:.2f} min, {elapsed * 1e3:.1f} ms",
    )
    assert ok


def test_2_subjective_ratio():
    got = subjective_reduction_ratio([14390, 13556, 13376, 12987, 14672], 68400)
    ok = abs(100 * got - 79.83) <= 0.05
    record(2, "subjective reduction ratio", ok, f"{100 * got:.4f}% vs 79.83%")
    assert ok


def _edge_frame(rng, h, w):
    edges = np.array([0, 1, 25, 26, 51, 76, 77, 102, 127, 128, 153, 178, 179, 204, 229, 230, 254, 255])
    px = rng.integers(0, 256, (h, w, 3))
    pick = rng.random((h, w, 3)) < 0.5
    px[pick] = rng.choice(edges, size=int(pick.sum()))
    return px.astype(np.uint8)


def test_3_oracle_suites():
    rng = np.random.default_rng(20240601)
    start = time.perf_counter()
    failures = {}

    bad = 0
    for _ in range(CASES):
        px = _edge_frame(rng, *rng.integers(1, 17, 2))
        thr = None if rng.random() < 0.7 else float(rng.choice([0.1, 0.3, 0.6]))
        bad += not np.array_equal(hsv_histogram(px, thr), oracles.histogram(px, thr))
    failures["histogram"] = bad

    bad = 0
    for i in range(CASES):
        link = LINKAGES[i % 3]
        n = int(rng.integers(1, 11))
        pts = rng.integers(0, 6, n).tolist()  # small integers force ties
        tree = build_dendrogram(np.array(pts, float), link)
        ref = oracles.agglomerate(pts, link)
        t1 = float(rng.uniform(0.01, 1.0))
        same_tree = [(m.left, m.right, m.height) for m in tree.merges] == ref
        same_cut = [list(c.member_ids) for c in cut_dendrogram(tree, t1)] == oracles.cut(ref, n, t1)
        bad += not (same_tree and same_cut)
    failures["clustering"] = bad

    bad = 0
    for _ in range(CASES):
        h, w = rng.integers(11, 25, 2)
        a = rng.uniform(0, 255, (h, w))
        b = np.clip(a + rng.normal(0, rng.uniform(0, 60), a.shape), 0, 255)
        bad += abs(mssim(a, b) - oracles.mssim(a, b)) >= 1e-9
    failures["mssim"] = bad

    bad = 0
    for _ in range(CASES):
        px = rng.integers(0, 256, (*rng.integers(1, 11, 2), 3)).astype(np.uint8)
        sigma = float(rng.uniform(0.5, 1.5))
        ref = oracles.saliency(px, sigma, oracles.lab_mp)
        bad += not np.allclose(saliency_map(px, sigma), ref, rtol=0, atol=1e-9)
    failures["saliency"] = bad

    elapsed = time.perf_counter() - start
    ok = not any(failures.values()) and elapsed < 60
    summary = ", ".join(f"{k} {CASES - v}/{CASES}" for k, v in failures.items())
    record(3, "oracle equivalence suites", ok, f"{summary}, {elapsed:.1f} s")
    assert ok


def test_4_analytic_ssim():
    a = np.full((40, 40), 100.0)
    b = np.full((40, 40), 110.0)
    s = mssim(a, b)
    x = np.random.default_rng(0).uniform(0, 255, (40, 40))
    self_sim = mssim(x, x)
    ok = abs(s - 0.995477) <= 1e-6 and self_sim == 1.0
    record(4, "analytic SSIM", ok, f"mssim(100, 110) = {s:.7f}, mssim(x, x) = {self_sim!r}")
    assert ok


def test_5_pipeline_invariants(tmp_path):
    same = FrameSequence.from_arrays([np.full((80, 80, 3), 128, np.uint8)] * 1000)
    n_same = screen_sequence(same).n_key

    seq = helpers.graded_sequence(0, scenes=3, repeats=40)
    grid = [round(0.01 * i, 2) for i in range(1, 21)]
    counts = [screen_sequence(seq, ScreenParams(t_ssim=t)).n_key for t in grid]
    monotone = all(a >= b for a, b in zip(counts, counts[1:]))

    proc, _ = cli("synth", "--out", tmp_path / "s", "--scenes", 8, "--repeats", 40, "--lesions", 5)
    assert proc.returncode == 0, proc.stderr
    frames = load_sequence(tmp_path / "s")
    write_manifest(screen_sequence(frames, threads=1), tmp_path / "t1.json")
    write_manifest(screen_sequence(frames, threads=8), tmp_path / "t8.json")
    identical = (tmp_path / "t1.json").read_bytes() == (tmp_path / "t8.json").read_bytes()

    ok = n_same == math.ceil(1000 / 64) and monotone and identical
    record(
        5,
        "pipeline invariants",
        ok,
        f"identical frames -> {n_same} keyframes (want {math.ceil(1000 / 64)}); "
        f"keyframes over T_ssim 0.01..0.20: {counts[0]} -> {counts[-1]}, monotone={monotone}; "
        f"1 vs 8 workers byte-identical={identical}",
    )
    assert ok


@pytest.fixture(scope="module")
def full_case(tmp_path_factory):
    reuse = os.environ.get("WCE_ACCEPT_SYNTH_DIR")
    if reuse and (Path(reuse) / "annotations.json").exists():
        return Path(reuse)
    d = tmp_path_factory.mktemp("synth_full")
    proc, _ = cli("synth", "--out", d, "--scenes", 50, "--repeats", 200, "--lesions", 20)
    assert proc.returncode == 0, proc.stderr
    return d


@pytest.fixture(scope="module")
def full_screen(full_case, tmp_path_factory):
    out = tmp_path_factory.mktemp("screen") / "manifest.json"
    proc, elapsed = cli("screen", "--input", full_case, "--out", out, "--threads", 0)
    assert proc.returncode == 0, proc.stderr
    return out, elapsed


def test_6_synthetic_end_to_end(full_case, full_screen):
    manifest, _ = full_screen
    result = read_manifest(manifest)
    ann = load_annotations(full_case / "annotations.json")
    rep = evaluate(ann, result)
    assert (result.t1, result.t_ssim) == (0.48, 0.03)
    ok = rep.abnormal_recall == 1.0 and rep.er_rate >= 0.70
    record(
        6,
        "synthetic end-to-end",
        ok,
        f"{rep.n_total} frames, K={rep.k}, keyframes {rep.n_key}, ER {rep.er_rate:.4f} (>= 0.70), "
        f"recall {rep.abnormal_recall:.3f} (= 1.0)",
    )
    assert ok


def test_7_throughput(full_case, full_screen):
    _, elapsed = full_screen
    n = SynthSpec().total_frames
    fps = n / elapsed
    cores = os.cpu_count()
    ok = fps >= 200
    record(
        7,
        "throughput",
        ok,
        f"{fps:.0f} frames/s for {n} 240x240 frames in {elapsed:.1f} s wall via `screen --threads 0` "
        f"on {cores} core(s); target 200 frames/s",
    )
    assert ok


def test_8_sweep_shape(full_case, tmp_path):
    out = tmp_path / "sweep.csv"
    proc, elapsed = cli(
        "sweep", "--input", full_case, "--annotations", full_case / "annotations.json", "--out", out, "--threads", 0
    )
    assert proc.returncode == 0, proc.stderr
    rows = read_sweep_csv(out.read_text())
    t1s = sorted({r.t1 for r in rows})
    tss = sorted({r.t_ssim for r in rows})
    by_t1 = {t1: [r.er_rate for r in sorted((r for r in rows if r.t1 == t1), key=lambda r: r.t_ssim)] for t1 in t1s}
    non_increasing = all(all(a >= b for a, b in zip(v, v[1:])) for v in by_t1.values())
    non_decreasing = all(all(a <= b for a, b in zip(v, v[1:])) for v in by_t1.values())
    er_by_t1 = [by_t1[t1][0] for t1 in t1s]
    grid_ok = t1s[0] == 0.18 and t1s[-1] == 0.88 and tss[0] == 0.03 and tss[-1] == 0.12 and len(rows) == 32
    ok = grid_ok and non_increasing
    record(
        8,
        "sweep shape",
        ok,
        f"{len(rows)} rows in {elapsed:.0f} s; er_rate non-increasing in T_ssim per T1={non_increasing} "
        f"(non-decreasing={non_decreasing}); er_rate over T1 at T_ssim=0.03: "
        + " ".join(f"{e:.3f}" for e in er_by_t1),
    )
    assert ok
