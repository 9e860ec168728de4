"""Paired per-run comparison of final sum rates against plain WMMSE.

Reads the per-run CSVs a scenario wrote (``<out>/<scenario>/run###.csv``)
and reports, for every other column, the mean final difference and the
fraction of runs in which it ends above the baseline.

    python scripts/paired_wins.py results/fig1_k20
"""
import argparse
import csv
from pathlib import Path

import numpy as np


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("run_dir", type=Path)
    p.add_argument("--baseline", default="wmmse")
    args = p.parse_args()
    finals = {}
    for path in sorted(args.run_dir.glob("run*.csv")):
        with open(path) as fh:
            rows = list(csv.reader(fh))
        for h, v in zip(rows[0][1:], rows[-1][1:]):
            finals.setdefault(h, []).append(float(v))
    base = np.array(finals.pop(args.baseline))
    print(f"{len(base)} runs, baseline {args.baseline} mean {base.mean():.4f} Gnats/s")
    for h, vals in finals.items():
        d = np.array(vals) - base
        print(f"{h:18s} mean diff {d.mean():+.4f}  wins {np.mean(d > 0):.0%}")


if __name__ == "__main__":
    main()
