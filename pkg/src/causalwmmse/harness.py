"""Monte-Carlo scenarios: convergence, robustness, scalability and ablation runs.

Every run regenerates topology, latent mixing matrix, training panel and
estimators from its own seed.  Within a run all algorithms share the
channel, the latent jitter sequence, the initial point and the coin
stream, so they differ only by their update rule.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import NormalDist

import numpy as np
import yaml

from . import __version__
from .config import SimConfig
from .latentnet import LatentPolicy, apply_policy, observe_interference
from .netgen import build_gains, generate_topology
from .scwmmse import EpsilonSchedule, sc_wmmse_iterate
from .synthctl import Variant, collect_panel, train
from .wmmse import EtaMode, init_state, rate_from_observation, wmmse_iterate

log = logging.getLogger(__name__)

# column name -> (kind, synthetic-control variant); column names are stable across output files
ALGORITHMS = {
    "wmmse": ("wmmse", None),
    "wmmse_local": ("local", None),
    "wmmse_sc": ("sc", None),  # variant taken from config.sc.variant
    "wmmse_sc_conv": ("sc", Variant.CONV),
    "wmmse_sc_uncons": ("sc", Variant.FREE),
    "wmmse_center": ("sc", Variant.CENTER),
    "wmmse_random": ("sc", Variant.DIRICH),
}

GIGA = 1e-9


class UnknownScenarioError(KeyError):
    pass


@dataclass(frozen=True)
class Scenario:
    name: str
    algorithms: tuple
    k_plus: int
    k_minus_train: int
    k_minus_infer: int
    iterations: int = 500
    runs: int = 50
    seed_base: int = 0
    ci_level: float = 0.90
    sweep: tuple | None = None  # K+ grid; set for scalability scenarios

    def __post_init__(self):
        if self.runs < 1 or self.iterations < 1 or self.k_plus < 1:
            raise ValueError("runs, iterations and k_plus must all be >= 1")
        if self.k_minus_train < 0 or self.k_minus_infer < 0:
            raise ValueError("latent link counts must be >= 0")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {alg!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        names = {f.name for f in dataclasses.fields(cls)}
        bad = set(data) - names
        if bad:
            raise ValueError(f"unknown scenario key(s): {', '.join(sorted(bad))}")
        data = dict(data)
        data["algorithms"] = tuple(data.get("algorithms", ()))
        if data.get("sweep") is not None:
            data["sweep"] = tuple(data["sweep"])
        return cls(**data)


BASELINES = ("wmmse", "wmmse_local", "wmmse_sc")


def builtin_scenarios() -> list[Scenario]:
    """Full-scale setups; desk-scale overrides come from the config."""
    out = [Scenario(f"fig1_k{k}", BASELINES, 50, k, k) for k in (20, 30, 40, 50)]
    out += [
        Scenario("fig2_zero-zero", BASELINES, 50, 0, 0),
        Scenario("fig2_dep-zero", BASELINES, 50, 50, 0),
        Scenario("fig2_zero-dep", BASELINES, 50, 0, 50),
        Scenario("fig3_sweep", BASELINES, 50, 50, 50, ci_level=0.99,
                 sweep=(25, 50, 75, 100, 125, 150, 175, 200)),
        Scenario("fig4_ablation",
                 ("wmmse", "wmmse_sc_uncons", "wmmse_sc_conv", "wmmse_center", "wmmse_random"),
                 50, 50, 50),
    ]
    return out


def get_scenario(name: str) -> Scenario:
    for sc in builtin_scenarios():
        if sc.name == name:
            return sc
    raise UnknownScenarioError(name)


def resolve(scenario: Scenario, cfg: SimConfig) -> Scenario:
    """Apply the config's run-level overrides to a scenario."""
    r = cfg.run
    changes = {"seed_base": r.seed}
    if r.runs is not None:
        changes["runs"] = r.runs
    if r.iterations is not None:
        changes["iterations"] = r.iterations
    if r.k_plus is not None and scenario.sweep is None:
        changes["k_plus"] = r.k_plus
    if r.algorithms is not None:
        changes["algorithms"] = tuple(r.algorithms)
    if scenario.sweep is not None and r.sweep is not None:
        changes["sweep"] = tuple(int(k) for k in r.sweep)
    return dataclasses.replace(scenario, **changes)


def column_labels(algorithms) -> list[str]:
    """Repeated algorithms get ``_2``, ``_3`` ... suffixes."""
    seen: dict[str, int] = {}
    labels = []
    for alg in algorithms:
        seen[alg] = seen.get(alg, 0) + 1
        labels.append(alg if seen[alg] == 1 else f"{alg}_{seen[alg]}")
    return labels


@dataclass
class RunRecord:
    run_index: int
    trajectories: dict  # label -> per-iteration weighted sum rate, nats/s
    final_power: dict  # label -> watts per known link
    counterfactual_updates: dict = field(default_factory=dict)  # label -> count
    excluded: bool = False
    diagnostic: str = ""
    traces: dict = field(default_factory=dict)  # label -> rows, filled only on request


@dataclass
class ScenarioStats:
    labels: list
    mean: np.ndarray  # (iterations, n_alg), nats/s
    ci: np.ndarray  # CI half-width, same shape
    level: float
    n_used: int
    throughput: dict  # label -> (mean, ci) per-link throughput, nats/s


def run_seeds(seed_base: int, run_index: int) -> list[np.random.SeedSequence]:
    ss = np.random.SeedSequence(entropy=seed_base, spawn_key=(run_index,))
    # topology, shadowing, mixing matrix, panel, jitter, init, coins, dirichlet
    return ss.spawn(8)


def _rng(seq: np.random.SeedSequence) -> np.random.Generator:
    return np.random.default_rng(seq)


def simulate_run(scenario: Scenario, cfg: SimConfig, run_index: int, trace: bool = False) -> RunRecord:
    seeds = run_seeds(scenario.seed_base, run_index)
    K, T = scenario.k_plus, scenario.iterations
    n_latent = max(scenario.k_minus_train, scenario.k_minus_infer)
    nc = cfg.network
    geom = generate_topology(K, n_latent, _rng(seeds[0]),
                             deployment_radius=nc.deployment_radius, rx_radius=nc.rx_radius)
    full = build_gains(geom, cfg.pathloss, _rng(seeds[1]), noise_power=nc.noise_watts(),
                       max_power=nc.max_power, weight=nc.weight, min_distance=nc.min_distance)
    policy = LatentPolicy.random(n_latent, K, _rng(seeds[2]), q_max=cfg.latent.q_max,
                                 noise_halfwidth=cfg.latent.noise_halfwidth)
    train_net = full.with_latent(scenario.k_minus_train)
    net = full.with_latent(scenario.k_minus_infer)
    train_policy = policy.head(scenario.k_minus_train)
    infer_policy = policy.head(scenario.k_minus_infer)

    labels = column_labels(scenario.algorithms)
    variants = {ALGORITHMS[a][1] or Variant(cfg.sc.variant)
                for a in scenario.algorithms if ALGORITHMS[a][0] == "sc"}
    estimators = {}
    if variants and K >= 2:
        panel = collect_panel(train_net, train_policy, cfg.sc.panel_length, _rng(seeds[3]))
        for v in sorted(variants, key=lambda v: v.value):
            estimators[v] = train(panel, v, tol=cfg.sc.tol, max_iter=cfg.sc.max_iter,
                                  ridge=cfg.sc.ridge, dirichlet_alpha=cfg.sc.dirichlet_alpha)

    jitter = infer_policy.draw_jitter(_rng(seeds[4]), T + 1)

    def observer(t):
        return lambda p: observe_interference(net, p, apply_policy(infer_policy, p, jitter[t]))

    schedule = EpsilonSchedule(cfg.sc.eps_a, cfg.sc.eps_b, T)
    record = RunRecord(run_index, {}, {})
    traces = {}
    for label, alg in zip(labels, scenario.algorithms):
        kind, variant = ALGORITHMS[alg]
        state = init_state(net, _rng(seeds[5]), observer(0))
        coins, dirichlet = _rng(seeds[6]), _rng(seeds[7])
        cf_log: list = []
        traj = np.empty(T)
        rows = []
        for t in range(T):
            observe = observer(t)
            if kind == "sc" and K >= 2:
                est = estimators[variant or Variant(cfg.sc.variant)]
                state = sc_wmmse_iterate(net, state, est, observe, schedule, coins,
                                         dirichlet_rng=dirichlet, counterfactual_log=cf_log)
            else:
                mode = EtaMode.LOCAL if kind == "local" else EtaMode.OBSERVED
                state = wmmse_iterate(net, state, observe, mode)
            p = state.power
            traj[t] = rate_from_observation(net, p, observer(t + 1)(p)) * nc.bandwidth_hz
            if trace:
                rows.append((t + 1, traj[t], p.copy(), cf_log[-1] if cf_log else []))
        record.trajectories[label] = traj
        record.final_power[label] = state.power
        record.counterfactual_updates[label] = sum(len(x) for x in cf_log)
        if trace:
            traces[label] = rows
        if not np.all(np.isfinite(traj)):
            record.excluded = True
            record.diagnostic += f"{label}: non-finite sum rate at iteration {int(np.argmin(np.isfinite(traj))) + 1}; "
    record.traces = traces
    return record


def confidence_interval(samples, level: float = 0.90) -> tuple[float, float]:
    """Normal-approximation (mean, half-width); a single sample has width 0."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("no samples")
    mean = float(np.mean(x))
    if x.size < 2:
        return mean, 0.0
    z = NormalDist().inv_cdf(0.5 + level / 2.0)
    return mean, float(z * np.std(x, ddof=1) / math.sqrt(x.size))


def per_link_throughput(trajectory, k_plus: int) -> float:
    """Average sum rate over the iterations, divided by the number of links."""
    return float(np.mean(np.asarray(trajectory, dtype=float))) / k_plus


def aggregate(records: list[RunRecord], labels: list, k_plus: int, level: float) -> ScenarioStats:
    used = [r for r in sorted(records, key=lambda r: r.run_index) if not r.excluded]
    if not used:
        raise RuntimeError("every run was excluded")
    T = len(used[0].trajectories[labels[0]])
    mean = np.empty((T, len(labels)))
    ci = np.empty_like(mean)
    throughput = {}
    for j, label in enumerate(labels):
        data = np.array([r.trajectories[label] for r in used])
        for t in range(T):
            mean[t, j], ci[t, j] = confidence_interval(data[:, t], level)
        throughput[label] = confidence_interval(
            [per_link_throughput(r.trajectories[label], k_plus) for r in used], level)
    return ScenarioStats(labels, mean, ci, level, len(used), throughput)


def _run_one(args):
    scenario, cfg, r = args
    return simulate_run(scenario, cfg, r)


def run_records(scenario: Scenario, cfg: SimConfig) -> list[RunRecord]:
    jobs = [(scenario, cfg, r) for r in range(scenario.runs)]
    if cfg.run.workers > 1 and scenario.runs > 1:
        with ProcessPoolExecutor(max_workers=cfg.run.workers) as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = [_run_one(j) for j in jobs]
    for rec in records:
        if rec.excluded:
            log.warning("run %d excluded: %s", rec.run_index, rec.diagnostic.strip())
    return records


def run_scenario(scenario: Scenario, cfg: SimConfig) -> tuple[ScenarioStats, list[RunRecord]]:
    records = run_records(scenario, cfg)
    labels = column_labels(scenario.algorithms)
    return aggregate(records, labels, scenario.k_plus, scenario.ci_level), records


@dataclass
class SweepStats:
    links: list
    labels: list
    mean: np.ndarray  # (n_points, n_alg) per-link throughput, nats/s
    ci: np.ndarray
    level: float


def run_sweep(scenario: Scenario, cfg: SimConfig) -> tuple[SweepStats, dict]:
    labels = column_labels(scenario.algorithms)
    links = list(scenario.sweep)
    mean = np.empty((len(links), len(labels)))
    ci = np.empty_like(mean)
    all_records = {}
    for i, k in enumerate(links):
        sub = dataclasses.replace(scenario, k_plus=int(k), sweep=None)
        stats, records = run_scenario(sub, cfg)
        for j, label in enumerate(labels):
            mean[i, j], ci[i, j] = stats.throughput[label]
        all_records[int(k)] = records
    return SweepStats(links, labels, mean, ci, scenario.ci_level), all_records


def _fmt(x: float) -> str:
    return repr(float(x))


def write_stats_csv(path, stats: ScenarioStats) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["iteration"]
        for label in stats.labels:
            header += [label, f"{label}_ci"]
        writer.writerow(header)
        for t in range(stats.mean.shape[0]):
            row = [t + 1]
            for j in range(len(stats.labels)):
                row += [_fmt(stats.mean[t, j] * GIGA), _fmt(stats.ci[t, j] * GIGA)]
            writer.writerow(row)


def write_sweep_csv(path, stats: SweepStats) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["links"]
        for label in stats.labels:
            header += [f"{label}_mean", f"{label}_ci"]
        writer.writerow(header)
        for i, k in enumerate(stats.links):
            row = [k]
            for j in range(len(stats.labels)):
                row += [_fmt(stats.mean[i, j] * GIGA), _fmt(stats.ci[i, j] * GIGA)]
            writer.writerow(row)


def write_run_csv(path, record: RunRecord, labels: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", *labels])
        T = len(record.trajectories[labels[0]])
        for t in range(T):
            writer.writerow([t + 1, *(_fmt(record.trajectories[l][t] * GIGA) for l in labels)])


def write_trace_csv(path, rows) -> None:
    """Per-iteration trace: sum rate, per-link power, counterfactual links."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        K = len(rows[0][2]) if rows else 0
        writer.writerow(["iteration", "sum_rate", *(f"p{k}" for k in range(K)), "counterfactual"])
        for it, rate, p, cf in rows:
            writer.writerow([it, _fmt(rate * GIGA), *(_fmt(x) for x in p), " ".join(map(str, cf))])


def manifest(scenario: Scenario, cfg: SimConfig, excluded: list) -> dict:
    return {
        "scenario": {k: (list(v) if isinstance(v, tuple) else v)
                     for k, v in dataclasses.asdict(scenario).items()},
        "config_sha256": cfg.digest(),
        "seed_base": scenario.seed_base,
        "excluded_runs": excluded,
        "rate_unit": "Gnats/s",
        "versions": {"causalwmmse": __version__, "numpy": np.__version__,
                     "pyyaml": yaml.__version__, "python": platform.python_version()},
    }


def write_outputs(scenario: Scenario, cfg: SimConfig, out_dir: str | Path | None = None) -> dict:
    """Run a resolved scenario and write CSVs plus manifest; returns written paths."""
    out = Path(out_dir if out_dir is not None else cfg.run.out)
    out.mkdir(parents=True, exist_ok=True)
    run_dir = out / scenario.name
    run_dir.mkdir(exist_ok=True)
    labels = column_labels(scenario.algorithms)
    paths = {}
    if scenario.sweep is not None:
        stats, by_k = run_sweep(scenario, cfg)
        paths["csv"] = out / f"{scenario.name}.csv"
        write_sweep_csv(paths["csv"], stats)
        excluded = [[k, r.run_index] for k, recs in by_k.items() for r in recs if r.excluded]
        for k, recs in by_k.items():
            for rec in recs:
                write_run_csv(run_dir / f"links{k:03d}_run{rec.run_index:03d}.csv", rec, labels)
    else:
        stats, records = run_scenario(scenario, cfg)
        paths["csv"] = out / f"{scenario.name}.csv"
        write_stats_csv(paths["csv"], stats)
        excluded = [r.run_index for r in records if r.excluded]
        for rec in records:
            write_run_csv(run_dir / f"run{rec.run_index:03d}.csv", rec, labels)
        if cfg.run.trace:
            rec = simulate_run(scenario, cfg, 0, trace=True)
            for label, rows in rec.traces.items():
                write_trace_csv(run_dir / f"trace_{label}.csv", rows)
    paths["manifest"] = out / f"{scenario.name}_manifest.json"
    paths["manifest"].write_text(json.dumps(manifest(scenario, cfg, excluded), indent=2, sort_keys=True) + "\n")
    paths["config"] = out / f"{scenario.name}_config.yaml"
    paths["config"].write_text(cfg.dump(results_only=True))
    return paths
