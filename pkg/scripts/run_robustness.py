"""Training/inference mismatch of the hidden network: K- = 0 or 50 at each stage.

    python scripts/run_robustness.py --out results
"""
import csv

from _common import config, parser, run_named


def main():
    args = parser(__doc__).parse_args()
    cfg = config(args)
    names = ["fig2_zero-zero", "fig2_dep-zero", "fig2_zero-dep"]
    for scenario, paths in run_named(names, cfg):
        with open(paths["csv"]) as fh:
            rows = list(csv.reader(fh))
        header, last = rows[0], rows[-1]
        cells = [f"{h}={float(m):.4f}+/-{float(c):.4f}"
                 for h, m, c in zip(header[1::2], last[1::2], last[2::2])]
        print(f"{scenario.name} final: {'  '.join(cells)}")


if __name__ == "__main__":
    main()
