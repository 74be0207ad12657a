"""``wce-screen`` command line.

Exit codes: 0 success, 2 usage or configuration error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import metrics
from ._alloc import tune_allocator
from .config import DEFAULT_PLAY_RATE, ConfigError, ScreenParams, build_params, load_config_file, resolve_run_option
from .frameio import (
    DEFAULT_PATTERN,
    FrameIOError,
    decode_image,
    load_annotations,
    load_sequence,
    read_manifest,
    write_manifest,
)
from .hcluster import cut_dendrogram, window_partition
from .pipeline import WindowAnalysis, estimate_play_time, screen_sequence
from .saliency import binarize, saliency_map, top_blocks
from .synth import SynthSpec, write_sequence

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

# CLI dest -> dotted config key
PARAM_FLAGS = {
    "t1": "t1",
    "t_ssim": "t_ssim",
    "compare_mode": "compare_mode",
    "window_n": "cluster.window_n",
    "linkage": "cluster.linkage",
    "sigma": "saliency.sigma",
    "block_size": "saliency.block_size",
    "k": "saliency.k",
    "ssim_aggregate": "ssim.aggregate",
    "mask_dark_threshold": "features.mask_dark_threshold",
}


class UsageError(Exception):
    pass


def _add_param_flags(p: argparse.ArgumentParser, *, thresholds: bool = True) -> None:
    g = p.add_argument_group("screening parameters")
    g.add_argument("--config", help="flat 'key = value' config file")
    if thresholds:
        g.add_argument("--t1", type=float, help="dendrogram cut, fraction of the max merge height (default 0.48)")
        g.add_argument("--t-ssim", type=float, help="salient-block dissimilarity threshold (default 0.03)")
    g.add_argument("--compare-mode", choices=["adjacent", "reference"])
    g.add_argument("--window-n", type=int, help="frames per clustering window (default 64)")
    g.add_argument("--linkage", choices=["average", "single", "complete"])
    g.add_argument("--sigma", type=float, help="saliency blur sigma (default 1.0)")
    g.add_argument("--block-size", type=int, help="salient block edge in pixels (default 40)")
    g.add_argument("--k", type=int, help="salient blocks per frame (default 3)")
    g.add_argument("--ssim-aggregate", choices=["mean", "min"])
    g.add_argument("--mask-dark-threshold", type=float)
    g.add_argument("--threads", type=int, help="worker processes, 0 = one per CPU (env WCE_SCREEN_THREADS)")


def _resolve(args) -> tuple[ScreenParams, dict[str, str]]:
    file_values = load_config_file(args.config) if getattr(args, "config", None) else {}
    values: dict = dict(file_values)
    for dest, key in PARAM_FLAGS.items():
        v = getattr(args, dest, None)
        if v is not None:
            values[key] = v
    return build_params(values), file_values


def _threads(args, file_values) -> int | None:
    return resolve_run_option("threads", getattr(args, "threads", None), file_values, None)


def _input(args, file_values) -> str:
    path = resolve_run_option("input", getattr(args, "input", None), file_values, None)
    if path is None:
        raise UsageError("--input is required")
    return path


def _progress(total: int):
    if not sys.stderr.isatty():
        return None
    done = [0]

    def tick(n: int) -> None:
        done[0] += n
        print(f"\r{done[0]}/{total} frames", end="", file=sys.stderr, flush=True)
        if done[0] >= total:
            print(file=sys.stderr)

    return tick


def cmd_screen(args) -> int:
    params, file_values = _resolve(args)
    rate = resolve_run_option("play_rate", args.play_rate, file_values, DEFAULT_PLAY_RATE)
    if not rate > 0:
        raise ConfigError("play_rate", f"must be positive, got {rate}")
    pattern = resolve_run_option("pattern", args.pattern, file_values, DEFAULT_PATTERN)
    seq = load_sequence(_input(args, file_values), pattern)
    result = screen_sequence(seq, params, threads=_threads(args, file_values), progress=_progress(len(seq)))
    write_manifest(result, args.out)
    er = metrics.er_rate(result.n_key, result.total_frames)
    print(f"frames: {result.total_frames}")
    print(f"keyframes: {result.n_key}")
    print(f"er_rate: {er:.4f}")
    print(f"play_time_original_min: {estimate_play_time(result.total_frames, rate):.2f}")
    print(f"play_time_screened_min: {estimate_play_time(result.n_key, rate):.2f}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    if not args.play_rate > 0:
        raise ConfigError("play_rate", f"must be positive, got {args.play_rate}")
    result = read_manifest(args.manifest)
    ann = load_annotations(args.annotations)
    if ann.total_frames != result.total_frames:
        raise FrameIOError(
            f"total_frames mismatch: manifest has {result.total_frames}, annotations have {ann.total_frames}"
        )
    report = metrics.evaluate(ann, result, args.play_rate)
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def _grid(text: str | None, default, name: str) -> list[float]:
    if text is None:
        return list(default)
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(name, f"cannot parse grid {text!r}") from None
    if not vals:
        raise ConfigError(name, "grid is empty")
    return vals


def cmd_sweep(args) -> int:
    params, file_values = _resolve(args)
    t1_grid = _grid(args.t1_grid, metrics.DEFAULT_T1_GRID, "t1_grid")
    ts_grid = _grid(args.t_ssim_grid, metrics.DEFAULT_T_SSIM_GRID, "t_ssim_grid")
    for t1 in t1_grid:
        for ts in ts_grid:
            params.replace(t1=t1, t_ssim=ts)
    pattern = resolve_run_option("pattern", args.pattern, file_values, DEFAULT_PATTERN)
    seq = load_sequence(_input(args, file_values), pattern)
    ann = load_annotations(args.annotations)
    if ann.total_frames != len(seq):
        raise FrameIOError(f"annotations cover {ann.total_frames} frames but the input has {len(seq)}")
    rows = metrics.sweep(
        seq, ann, t1_grid, ts_grid, params, threads=_threads(args, file_values), progress=_progress(len(seq))
    )
    text = metrics.sweep_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        spec = SynthSpec(
            scenes=args.scenes,
            repeats=args.repeats,
            lesions=args.lesions,
            noise=args.noise,
            width=args.width,
            height=args.height,
            seed=args.seed,
        )
    except ValueError as e:
        raise UsageError(str(e)) from None
    ann = write_sequence(spec, args.out, args.format)
    print(f"wrote {spec.total_frames} frames and {ann.k} lesion records to {args.out}")
    return EXIT_OK


def cmd_saliency(args) -> int:
    params, _ = _resolve(args)
    sp = params.saliency
    frame_path = Path(args.dump)
    pixels = decode_image(frame_path)
    smap = saliency_map(pixels, sp.sigma)
    mask = binarize(smap)
    blocks = top_blocks(mask, sp.block_size, sp.k)
    out_dir = Path(args.out_dir) if args.out_dir else frame_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = frame_path.stem
    peak = smap.max()
    gray = np.zeros(smap.shape, np.uint8) if peak == 0 else np.rint(smap / peak * 255).astype(np.uint8)
    Image.fromarray(gray).save(out_dir / f"{stem}.saliency.png")
    Image.fromarray(mask.bits.astype(np.uint8) * 255).save(out_dir / f"{stem}.mask.png")
    doc = {
        "frame": str(frame_path),
        "threshold": mask.threshold_used,
        "block_size": sp.block_size,
        "blocks": [b.as_list() for b in blocks],
    }
    (out_dir / f"{stem}.blocks.json").write_text(json.dumps(doc, indent=1) + "\n")
    print(json.dumps(doc))
    return EXIT_OK


def cmd_cluster(args) -> int:
    params, file_values = _resolve(args)
    pattern = resolve_run_option("pattern", args.pattern, file_values, DEFAULT_PATTERN)
    seq = load_sequence(args.dump, pattern)
    windows = window_partition(seq, params.window_n)
    if not 0 <= args.window < len(windows):
        raise UsageError(f"--window must lie in [0, {len(windows)}), got {args.window}")
    wa = WindowAnalysis(windows[args.window], params)
    doc = wa.dendrogram.to_dict()
    doc["window"] = args.window
    doc["t1"] = params.t1
    doc["clusters"] = [list(c.member_ids) for c in cut_dendrogram(wa.dendrogram, params.t1)]
    text = json.dumps(doc, indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wce-screen", description="Screen redundant frames out of capsule endoscopy sequences.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("screen", help="select keyframes and write a manifest")
    p.add_argument("--input", help="directory of numbered frames")
    p.add_argument("--pattern", help="filename glob (default '*')")
    p.add_argument("--out", required=True, help="manifest JSON path")
    p.add_argument("--play-rate", type=float, help=f"frames per minute for play-time estimates (default {DEFAULT_PLAY_RATE})")
    _add_param_flags(p)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("evaluate", help="reduction ratio and lesion recall of a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--play-rate", type=float, default=DEFAULT_PLAY_RATE)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="grid over T1 and T_ssim, CSV of er_rate and recall")
    p.add_argument("--input", help="directory of numbered frames")
    p.add_argument("--pattern")
    p.add_argument("--annotations", required=True)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--t1-grid", help="comma-separated T1 values (default 0.18..0.88 step 0.10)")
    p.add_argument("--t-ssim-grid", help="comma-separated T_ssim values (default 0.03..0.12 step 0.03)")
    _add_param_flags(p, thresholds=False)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="write a seeded synthetic sequence with annotations")
    p.add_argument("--out", required=True)
    p.add_argument("--scenes", type=int, default=50)
    p.add_argument("--repeats", type=int, default=200)
    p.add_argument("--lesions", type=int, default=20)
    p.add_argument("--noise", type=float, default=SynthSpec.noise, help="Gaussian pixel noise sigma")
    p.add_argument("--width", type=int, default=240)
    p.add_argument("--height", type=int, default=240)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--format", choices=["jpg", "png", "bmp"], default="jpg")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("saliency", help="dump saliency map, mask and top blocks for one frame")
    p.add_argument("--dump", required=True, metavar="FRAME")
    p.add_argument("--out-dir")
    _add_param_flags(p, thresholds=False)
    p.set_defaults(func=cmd_saliency)

    p = sub.add_parser("cluster", help="dump one window's dendrogram and cut as JSON")
    p.add_argument("--dump", required=True, metavar="DIR")
    p.add_argument("--pattern")
    p.add_argument("--window", type=int, default=0, help="window index")
    p.add_argument("--out")
    _add_param_flags(p)
    p.set_defaults(func=cmd_cluster)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    tune_allocator()
    try:
        return args.func(args)
    except (ConfigError, UsageError) as e:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FrameIOError, ValueError, OSError) as e:
        print(f"{parser.prog}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
