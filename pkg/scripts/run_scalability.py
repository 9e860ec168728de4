"""Per-link throughput as the number of known links grows (K- = 50, 99% CI).

The K+ grid comes from run.sweep in the config (--full-scale: 25 ... 200).

    python scripts/run_scalability.py --out results
"""
from _common import config, parser, run_named


def main():
    args = parser(__doc__).parse_args()
    cfg = config(args)
    for _, paths in run_named(["fig3_sweep"], cfg):
        print(paths["csv"].read_text(), end="")


if __name__ == "__main__":
    main()
