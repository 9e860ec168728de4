"""Shared argument handling for the experiment scripts."""
import argparse
import sys
import time
from pathlib import Path

from causalwmmse.config import load_config
from causalwmmse.harness import get_scenario, resolve, write_outputs


def parser(description):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--config", help="YAML config (defaults to the built-in desk-scale settings)")
    p.add_argument("--out", default="results")
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--k-plus", type=int, dest="k_plus")
    p.add_argument("--workers", type=int)
    p.add_argument("--full-scale", action="store_true",
                   help="use each scenario's own runs, iterations, K+ and sweep (50 runs, 500 iterations)")
    return p


def config(args):
    cfg = load_config(args.config)
    run = {"out": args.out}
    if args.full_scale:
        run.update(runs=None, iterations=None, k_plus=None, sweep=(25, 50, 75, 100, 125, 150, 175, 200))
    for key in ("seed", "runs", "iterations", "k_plus", "workers"):
        if getattr(args, key) is not None:
            run[key] = getattr(args, key)
    return cfg.with_overrides(run=run)


def run_named(names, cfg):
    for name in names:
        scenario = resolve(get_scenario(name), cfg)
        start = time.perf_counter()
        paths = write_outputs(scenario, cfg, Path(cfg.run.out))
        print(f"{name}: {paths['csv']}  ({time.perf_counter() - start:.0f} s)", file=sys.stderr)
        yield scenario, paths
