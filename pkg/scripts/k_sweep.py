"""Classify the forced linear oscillator x'' + c x' + k x = cos t across k.

Writes the sweep CSV and prints the bracketed regime transitions.

    python3 scripts/k_sweep.py --range -0.5:1.0:16 --out k_sweep.csv
"""

import argparse

from duffing_decay.analysis import find_transitions, parse_range, refine_transition, rows_to_csv, sweep
from duffing_decay.model import linear_model, cos_forcing


def regime(row):
    return row.stable, row.classification != "RealDistinct"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--c", type=float, default=1.0)
    ap.add_argument("--range", default="-0.5:1.0:16")
    ap.add_argument("--width", type=float, default=1e-3, help="bracket width for transitions")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    model = linear_model(args.c, 0.34, cos_forcing())
    rows = sweep(model, "g.k", parse_range(args.range), "floquet", workers=args.workers)
    text = rows_to_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    for r in rows:
        print(f"k={r.param:8.4f}  {r.classification:12s} stable={r.stable!s:5s} decay={r.decay_rate:.10f}")
    for lo, hi in find_transitions(rows, regime):
        a, b = refine_transition(model, "g.k", lo, hi, regime, args.width)
        print(f"transition in [{a:.6f}, {b:.6f}]")
    print(f"c^2/4 = {args.c**2 / 4:.6f}")


if __name__ == "__main__":
    main()
