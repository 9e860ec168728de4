"""Estimator ablation: SC with simplex (Conv), unconstrained (Free), barycentre
(Center) and Dirichlet-random (Dirich) coefficients against plain WMMSE.

    python scripts/run_ablation.py --out results
"""
import csv

from _common import config, parser, run_named


def main():
    args = parser(__doc__).parse_args()
    cfg = config(args)
    for scenario, paths in run_named(["fig4_ablation"], cfg):
        with open(paths["csv"]) as fh:
            rows = list(csv.reader(fh))
        header, last = rows[0], rows[-1]
        for h, m, c in zip(header[1::2], last[1::2], last[2::2]):
            print(f"{h:18s} {float(m):.4f} +/- {float(c):.4f} Gnats/s")


if __name__ == "__main__":
    main()
