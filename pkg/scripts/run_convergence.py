"""Sum-rate convergence of WMMSE, WMMSE (Local) and SC-WMMSE for K- in {20, 30, 40, 50}.

    python scripts/run_convergence.py --out results
"""
import csv

from _common import config, parser, run_named


def main():
    args = parser(__doc__).parse_args()
    cfg = config(args)
    names = [f"fig1_k{k}" for k in (20, 30, 40, 50)]
    for scenario, paths in run_named(names, cfg):
        with open(paths["csv"]) as fh:
            rows = list(csv.reader(fh))
        header, last = rows[0], rows[-1]
        finals = "  ".join(f"{h}={float(v):.4f}" for h, v in zip(header[1::2], last[1::2]))
        print(f"{scenario.name} final (Gnats/s): {finals}")


if __name__ == "__main__":
    main()
