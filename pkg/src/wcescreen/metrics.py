"""Reduction ratios, lesion recall and the threshold sweep."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .config import DEFAULT_PLAY_RATE, ScreenParams
from .frameio import AnnotationSet, FrameSequence, ScreeningResult
from .pipeline import estimate_play_time, screen_grid

DEFAULT_T1_GRID = tuple(round(0.18 + 0.10 * i, 2) for i in range(8))  # 0.18 .. 0.88
DEFAULT_T_SSIM_GRID = (0.03, 0.06, 0.09, 0.12)
SWEEP_COLUMNS = ("t1", "t_ssim", "er_rate", "abnormal_recall")


def er_rate(n_key: int, n_total: int) -> float:
    """Fraction of frames screened out, ``1 - n_key / n_total``."""
    if n_total <= 0:
        raise ValueError("n_total must be positive")
    if not 0 < n_key <= n_total:
        raise ValueError(f"n_key must lie in (0, n_total]; got {n_key} of {n_total}")
    return 1.0 - n_key / n_total


def subjective_reduction_ratio(doctor_cluster_counts: Sequence[int], n_total: int) -> float:
    """Mean over readers of ``1 - clusters / n_total``."""
    counts = list(doctor_cluster_counts)
    if not counts:
        raise ValueError("need at least one reader's cluster count")
    if n_total <= 0:
        raise ValueError("n_total must be positive")
    for c in counts:
        if not 0 <= c <= n_total:
            raise ValueError(f"cluster count {c} outside [0, {n_total}]")
    return float(np.mean([1.0 - c / n_total for c in counts]))


@dataclass(frozen=True)
class RecallReport:
    sd: int
    k: int
    recall: float
    per_lesion: dict[str, int]


def abnormal_recall(annotations: AnnotationSet, result: ScreeningResult) -> RecallReport:
    """Share of lesion sets with at least one retained frame; 1.0 when there are none."""
    if annotations.total_frames != result.total_frames:
        raise ValueError(
            f"annotations cover {annotations.total_frames} frames but the result covers {result.total_frames}"
        )
    kept = set(result.keyframe_ids)
    hits = [int(not kept.isdisjoint(les.frame_ids)) for les in annotations.lesions]
    per_lesion = {les.lesion_id: hit for les, hit in zip(annotations.lesions, hits)}
    sd = sum(hits)
    k = len(hits)
    return RecallReport(sd, k, sd / k if k else 1.0, per_lesion)


@dataclass(frozen=True)
class MetricsReport:
    er_rate: float
    abnormal_recall: float
    sd: int
    k: int
    n_key: int
    n_total: int
    play_time_original_min: float
    play_time_screened_min: float
    per_lesion_recall: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(
    annotations: AnnotationSet, result: ScreeningResult, play_rate: float = DEFAULT_PLAY_RATE
) -> MetricsReport:
    rec = abnormal_recall(annotations, result)
    return MetricsReport(
        er_rate=er_rate(result.n_key, result.total_frames),
        abnormal_recall=rec.recall,
        sd=rec.sd,
        k=rec.k,
        n_key=result.n_key,
        n_total=result.total_frames,
        play_time_original_min=estimate_play_time(result.total_frames, play_rate),
        play_time_screened_min=estimate_play_time(result.n_key, play_rate),
        per_lesion_recall=rec.per_lesion,
    )


@dataclass(frozen=True)
class SweepRow:
    t1: float
    t_ssim: float
    er_rate: float
    abnormal_recall: float


def sweep(
    frames: FrameSequence,
    annotations: AnnotationSet,
    t1_grid: Sequence[float] = DEFAULT_T1_GRID,
    t_ssim_grid: Sequence[float] = DEFAULT_T_SSIM_GRID,
    params: ScreenParams = ScreenParams(),
    threads: int | None = 1,
    progress=None,
) -> list[SweepRow]:
    """One row per ``(t1, t_ssim)`` pair, T1-major, in the order given."""
    if not t1_grid or not t_ssim_grid:
        raise ValueError("sweep grids must be non-empty")
    grid = list(product(t1_grid, t_ssim_grid))
    if len(set(grid)) != len(grid):
        raise ValueError("sweep grid points must be unique")
    results = screen_grid(frames, grid, params, threads=threads, progress=progress)
    rows = []
    for (t1, ts), res in zip(grid, results):
        rows.append(SweepRow(t1, ts, er_rate(res.n_key, res.total_frames), abnormal_recall(annotations, res).recall))
    return rows


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([f"{r.t1:.6f}", f"{r.t_ssim:.6f}", f"{r.er_rate:.6f}", f"{r.abnormal_recall:.6f}"])
    return buf.getvalue()


def read_sweep_csv(text: str) -> list[SweepRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != SWEEP_COLUMNS:
        raise ValueError(f"unexpected sweep header {reader.fieldnames}")
    return [SweepRow(*(float(row[c]) for c in SWEEP_COLUMNS)) for row in reader]
