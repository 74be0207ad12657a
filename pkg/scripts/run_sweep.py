"""Threshold sweep on a seeded synthetic sequence.

Writes the sequence (unless --input points at an existing one), sweeps the
default T1 x T_ssim grid and prints er_rate and recall as two tables. With
--noise-grid the sweep is repeated for several capture-noise levels, which is
where T_ssim starts to matter.

    python3 scripts/run_sweep.py --work /tmp/wce --noise-grid 1,4,8
"""

import argparse
import tempfile
from pathlib import Path

from wcescreen.frameio import load_annotations, load_sequence
from wcescreen.metrics import DEFAULT_T1_GRID, DEFAULT_T_SSIM_GRID, sweep
from wcescreen.synth import SynthSpec, write_sequence


def table(rows, field: str) -> str:
    ts = sorted({r.t_ssim for r in rows})
    lines = ["T1 \\ T_ssim " + " ".join(f"{t:>6.2f}" for t in ts)]
    for t1 in sorted({r.t1 for r in rows}):
        vals = {r.t_ssim: getattr(r, field) for r in rows if r.t1 == t1}
        lines.append(f"{t1:>11.2f} " + " ".join(f"{vals[t]:>6.3f}" for t in ts))
    return "\n".join(lines)


def run(seq_dir: Path, threads: int) -> None:
    frames = load_sequence(seq_dir)
    ann = load_annotations(seq_dir / "annotations.json")
    rows = sweep(frames, ann, DEFAULT_T1_GRID, DEFAULT_T_SSIM_GRID, threads=threads)
    print("er_rate\n" + table(rows, "er_rate"))
    print("abnormal_recall\n" + table(rows, "abnormal_recall"))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input", type=Path, help="existing sequence directory with annotations.json")
    ap.add_argument("--work", type=Path, help="where to write synthetic sequences (default: a temp dir)")
    ap.add_argument("--scenes", type=int, default=50)
    ap.add_argument("--repeats", type=int, default=200)
    ap.add_argument("--noise-grid", default=None, help="comma list of noise levels")
    ap.add_argument("--threads", type=int, default=0)
    args = ap.parse_args()

    if args.input:
        run(args.input, args.threads)
        return
    work = args.work or Path(tempfile.mkdtemp(prefix="wce-sweep-"))
    noises = [float(x) for x in args.noise_grid.split(",")] if args.noise_grid else [SynthSpec().noise]
    for noise in noises:
        spec = SynthSpec(scenes=args.scenes, repeats=args.repeats, noise=noise)
        d = work / f"noise{noise:g}"
        if not (d / "annotations.json").exists():
            write_sequence(spec, d)
        print(f"== noise {noise:g}, {spec.total_frames} frames in {d}")
        run(d, args.threads)


if __name__ == "__main__":
    main()
