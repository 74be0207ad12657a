"""Recompute the per-case reduction ratios and play times of the published table.

Reads tests/data/published_cases.csv and prints one line per case with the recomputed
values next to the published ones, then the worst absolute errors.

    python3 scripts/published_parity.py [--rate 984.1]
"""

import argparse
import csv
from pathlib import Path

from wcescreen.metrics import er_rate
from wcescreen.pipeline import estimate_play_time

TABLE = Path(__file__).resolve().parent.parent / "tests" / "data" / "published_cases.csv"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rate", type=float, default=984.1, help="frames per minute")
    ap.add_argument("--table", type=Path, default=TABLE)
    args = ap.parse_args()

    with open(args.table) as fh:
        rows = list(csv.DictReader(fh))
    worst_er = worst_play = 0.0
    print(f"{'case':>4} {'orig':>6} {'key':>6} {'ER%':>7} {'pub':>6} {'play_o':>7} {'play_s':>7}")
    for r in rows:
        o, k = int(r["original"]), int(r["keyframes"])
        er = 100 * er_rate(k, o)
        po, ps = estimate_play_time(o, args.rate), estimate_play_time(k, args.rate)
        worst_er = max(worst_er, abs(er - float(r["er_rate_pct"])))
        worst_play = max(worst_play, abs(po - float(r["play_original_min"])), abs(ps - float(r["play_screened_min"])))
        print(f"{r['case']:>4} {o:>6} {k:>6} {er:>7.2f} {float(r['er_rate_pct']):>6.1f} {po:>7.2f} {ps:>7.2f}")
    mean_er = 100 * sum(er_rate(int(r["keyframes"]), int(r["original"])) for r in rows) / len(rows)
    mean_key = sum(int(r["keyframes"]) for r in rows) / len(rows)
    print(f"mean ER {mean_er:.2f}%, mean screened play time {estimate_play_time(mean_key, args.rate):.2f} min")
    print(f"max |ER error| {worst_er:.3f} pp, max |play-time error| {worst_play:.4f} min")


if __name__ == "__main__":
    main()
