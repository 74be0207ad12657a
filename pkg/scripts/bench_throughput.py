"""Time the ``screen`` command end to end on a synthetic sequence.

Frames per second is total frames over subprocess wall time, so decoding,
start-up and manifest writing are all included.

    python3 scripts/bench_throughput.py --threads 0 --runs 3
"""

import argparse
import os
import statistics
import subprocess
import sys
import tempfile
import time
from pathlib import Path

from wcescreen.synth import SynthSpec, write_sequence


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input", type=Path, help="existing sequence directory")
    ap.add_argument("--scenes", type=int, default=50)
    ap.add_argument("--repeats", type=int, default=200)
    ap.add_argument("--threads", type=int, default=0)
    ap.add_argument("--runs", type=int, default=3)
    args = ap.parse_args()

    work = Path(tempfile.mkdtemp(prefix="wce-bench-"))
    seq = args.input
    if seq is None:
        seq = work / "seq"
        write_sequence(SynthSpec(scenes=args.scenes, repeats=args.repeats), seq)
    n = sum(1 for p in seq.iterdir() if p.suffix.lower() in {".jpg", ".jpeg", ".png", ".bmp"})

    times = []
    for i in range(args.runs):
        cmd = [sys.executable, "-m", "wcescreen", "screen", "--input", str(seq),
               "--out", str(work / "manifest.json"), "--threads", str(args.threads)]
        start = time.perf_counter()
        subprocess.run(cmd, check=True, stdout=subprocess.DEVNULL)
        times.append(time.perf_counter() - start)
        print(f"run {i + 1}: {times[-1]:.1f} s, {n / times[-1]:.0f} frames/s")
    best = min(times)
    print(f"{n} frames, {os.cpu_count()} CPU(s): best {n / best:.0f} frames/s, median {n / statistics.median(times):.0f} frames/s")


if __name__ == "__main__":
    main()
