"""Command-line entry point.

    causalwmmse scenario fig1_k20 --seed 1 --runs 2
    causalwmmse fit-sc --panel panel.csv --out fits
    causalwmmse gen-net --seed 3 --out net
    causalwmmse validate-config --config my.yaml

Failures print a single ``error: <kind>: <message>`` line on stderr and
exit with status 2.  Set CAUSALWMMSE_LOG=DEBUG (or INFO, WARNING) for logs.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from .config import SimConfig, load_config
from .harness import (UnknownScenarioError, Scenario, get_scenario, resolve, run_seeds,
                      write_outputs)
from .latentnet import LatentPolicy
from .netgen import InvalidConfigError, build_gains, generate_topology
from .synthctl import PanelData, PanelDataError, Variant, residual_norm, train


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--k-plus", type=int, dest="k_plus")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--algorithms", metavar="LIST", help="comma separated column names")
    p.add_argument("--sc-variant", choices=[v.value for v in Variant], dest="sc_variant")
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causalwmmse")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scenario", help="run a builtin or YAML-defined scenario")
    p.add_argument("name", help="builtin scenario name or path to a scenario YAML file")
    p.add_argument("--trace", action="store_true", help="also dump per-iteration traces of run 0")
    _common(p)

    p = sub.add_parser("fit-sc", help="train synthetic-control estimators from a panel CSV")
    p.add_argument("--panel", required=True, metavar="PATH")
    _common(p)

    p = sub.add_parser("gen-net", help="dump a topology, gain matrix and mixing matrix")
    p.add_argument("--k-minus", type=int, default=20, dest="k_minus")
    _common(p)

    p = sub.add_parser("validate-config", help="check a config file and print its digest")
    _common(p)
    return parser


def config_from_args(args) -> SimConfig:
    cfg = load_config(args.config)
    run, sc = {}, {}
    for key in ("seed", "runs", "iterations", "k_plus", "out", "workers"):
        value = getattr(args, key, None)
        if value is not None:
            run[key] = value
    if getattr(args, "trace", False):
        run["trace"] = True
    if getattr(args, "algorithms", None):
        run["algorithms"] = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    if getattr(args, "sc_variant", None):
        sc["variant"] = args.sc_variant
    if run or sc:
        cfg = cfg.with_overrides(run=run, sc=sc)
    return cfg


def _output_dir(cfg: SimConfig) -> Path:
    out = Path(cfg.run.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise CliError("output", f"cannot write to {out}: {exc.strerror}") from None
    return out


def _load_scenario(name: str) -> Scenario:
    path = Path(name)
    if path.suffix in (".yaml", ".yml"):
        try:
            data = yaml.safe_load(path.read_text())
            return Scenario.from_dict(data)
        except OSError as exc:
            raise CliError("scenario", f"cannot read {name}: {exc.strerror}") from None
        except (ValueError, TypeError, yaml.YAMLError) as exc:
            raise CliError("scenario", f"{name}: {exc}") from None
    try:
        return get_scenario(name)
    except UnknownScenarioError:
        raise CliError("scenario", f"unknown scenario {name!r}") from None


def cmd_scenario(args, cfg: SimConfig) -> int:
    scenario = _load_scenario(args.name)
    try:
        scenario = resolve(scenario, cfg)
    except ValueError as exc:
        raise CliError("scenario", str(exc)) from None
    out = _output_dir(cfg)
    paths = write_outputs(scenario, cfg, out)
    for key in sorted(paths):
        print(f"{key}\t{paths[key]}")
    return 0


def cmd_fit_sc(args, cfg: SimConfig) -> int:
    try:
        panel = PanelData.from_csv(args.panel)
    except OSError as exc:
        raise CliError("panel", f"cannot read {args.panel}: {exc.strerror}") from None
    variant = Variant(cfg.sc.variant)
    est = train(panel, variant, tol=cfg.sc.tol, max_iter=cfg.sc.max_iter, ridge=cfg.sc.ridge,
                dirichlet_alpha=cfg.sc.dirichlet_alpha)
    out = _output_dir(cfg)
    path = out / f"estimator_{variant.value}.csv"
    est.to_csv(path, panel.link_ids)
    ids = panel.link_ids or range(panel.K)
    for k, link in enumerate(ids):
        print(f"{link}\tresidual={residual_norm(panel, k, est.coefficients[k]):.3e}")
    print(f"estimator\t{path}")
    return 0


def cmd_gen_net(args, cfg: SimConfig) -> int:
    K = cfg.run.k_plus or 20
    seeds = run_seeds(cfg.run.seed, 0)
    nc = cfg.network
    geom = generate_topology(K, args.k_minus, np.random.default_rng(seeds[0]),
                             deployment_radius=nc.deployment_radius, rx_radius=nc.rx_radius)
    net = build_gains(geom, cfg.pathloss, np.random.default_rng(seeds[1]),
                      noise_power=nc.noise_watts(), max_power=nc.max_power, weight=nc.weight,
                      min_distance=nc.min_distance)
    policy = LatentPolicy.random(args.k_minus, K, np.random.default_rng(seeds[2]),
                                 q_max=cfg.latent.q_max, noise_halfwidth=cfg.latent.noise_halfwidth)
    out = _output_dir(cfg)
    geom.to_csv(out / "topology.csv")
    net.gains_to_csv(out / "gains.csv")
    policy.to_csv(out / "mixing.csv")
    for name in ("topology.csv", "gains.csv", "mixing.csv"):
        print(out / name)
    return 0


def cmd_validate(args, cfg: SimConfig) -> int:
    print(f"ok\t{cfg.digest()}")
    return 0


COMMANDS = {
    "scenario": cmd_scenario,
    "fit-sc": cmd_fit_sc,
    "gen-net": cmd_gen_net,
    "validate-config": cmd_validate,
}


def run(argv=None) -> int:
    level = os.environ.get("CAUSALWMMSE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](args, cfg)
    except CliError as exc:
        kind, msg = exc.kind, str(exc)
    except InvalidConfigError as exc:
        kind, msg = "config", str(exc)
    except PanelDataError as exc:
        kind, msg = "panel", str(exc)
    print(f"error: {kind}: {msg}".replace("\n", " "), file=sys.stderr)
    return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
