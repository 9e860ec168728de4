"""Simulation configuration: nested dataclasses loaded from / dumped to YAML.

Precedence, lowest to highest: dataclass defaults, the YAML file given by
``--config``, then command-line flags.  Unknown keys are rejected.
"""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .netgen import InvalidConfigError, PathLossParams, thermal_noise_watts


@dataclass(frozen=True)
class NetworkConfig:
    deployment_radius: float = 200.0  # m
    rx_radius: float = 25.0  # m
    min_distance: float = 1.0  # m, tx-rx distance floor
    bandwidth_hz: float = 80e6
    max_power: float = 0.2  # W per known link
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 7.0
    noise_power: float | None = None  # W; overrides the thermal computation when set
    weight: float = 1.0

    def noise_watts(self) -> float:
        if self.noise_power is not None:
            return float(self.noise_power)
        return thermal_noise_watts(self.bandwidth_hz, self.noise_figure_db, self.noise_psd_dbm_hz)


@dataclass(frozen=True)
class LatentConfig:
    q_max: float = 0.2  # W
    noise_halfwidth: float = 0.1


@dataclass(frozen=True)
class ScConfig:
    variant: str = "conv"
    panel_length: int = 256
    eps_a: float = 0.2
    eps_b: float = 2.0
    tol: float = 1e-10
    max_iter: int = 100_000
    ridge: float = 1e-10
    dirichlet_alpha: float = 1.0


@dataclass(frozen=True)
class WmmseConfig:
    tol: float = 1e-8
    patience: int = 5


@dataclass(frozen=True)
class RunConfig:
    # None means "use the scenario's own value"
    runs: int | None = 20
    iterations: int | None = 200
    k_plus: int | None = 20
    algorithms: tuple | None = None
    seed: int = 0
    out: str = "results"
    workers: int = 1
    sweep: tuple = (5, 10, 20, 40)
    trace: bool = False


@dataclass(frozen=True)
class SimConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    pathloss: PathLossParams = field(default_factory=PathLossParams)
    latent: LatentConfig = field(default_factory=LatentConfig)
    sc: ScConfig = field(default_factory=ScConfig)
    wmmse: WmmseConfig = field(default_factory=WmmseConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def validate(self) -> "SimConfig":
        n, r, sc = self.network, self.run, self.sc
        checks = [
            (n.deployment_radius > 0, "network.deployment_radius must be > 0"),
            (n.rx_radius > 0, "network.rx_radius must be > 0"),
            (n.min_distance > 0, "network.min_distance must be > 0"),
            (n.bandwidth_hz > 0, "network.bandwidth_hz must be > 0"),
            (n.max_power > 0, "network.max_power must be > 0"),
            (n.noise_power is None or n.noise_power > 0, "network.noise_power must be > 0"),
            (n.weight >= 0, "network.weight must be >= 0"),
            (self.latent.q_max > 0, "latent.q_max must be > 0"),
            (self.latent.noise_halfwidth >= 0, "latent.noise_halfwidth must be >= 0"),
            (sc.variant in ("conv", "free", "center", "dirich"), f"unknown sc.variant {sc.variant!r}"),
            (sc.panel_length >= 1, "sc.panel_length must be >= 1"),
            (0 <= sc.eps_a <= 1, "sc.eps_a must lie in [0, 1]"),
            (sc.eps_b > 0, "sc.eps_b must be > 0"),
            (sc.dirichlet_alpha > 0, "sc.dirichlet_alpha must be > 0"),
            (r.runs is None or r.runs >= 1, "run.runs must be >= 1"),
            (r.iterations is None or r.iterations >= 1, "run.iterations must be >= 1"),
            (r.k_plus is None or r.k_plus >= 1, "run.k_plus must be >= 1"),
            (r.workers >= 1, "run.workers must be >= 1"),
            (all(int(k) >= 2 for k in r.sweep), "run.sweep entries must be >= 2"),
        ]
        for ok, msg in checks:
            if not ok:
                raise InvalidConfigError(msg)
        return self

    def to_dict(self) -> dict:
        def plain(x):
            if isinstance(x, dict):
                return {k: plain(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [plain(v) for v in x]
            return x
        return plain(dataclasses.asdict(self))

    def dump(self, *, results_only: bool = False) -> str:
        """YAML text; ``results_only`` drops keys that cannot change any number."""
        data = self.to_dict()
        if results_only:
            for key in _PLACEMENT_KEYS:
                del data["run"][key]
        return yaml.safe_dump(data, sort_keys=True, default_flow_style=False)

    def digest(self) -> str:
        """Hash of everything that can affect results (not output dir or worker count)."""
        return hashlib.sha256(self.dump(results_only=True).encode()).hexdigest()

    def with_overrides(self, **sections) -> "SimConfig":
        """``with_overrides(run={"runs": 2})`` style partial update."""
        return from_dict(_merge(self.to_dict(), sections))


_PLACEMENT_KEYS = ("out", "workers")
_SECTIONS = {f.name: f.default_factory for f in dataclasses.fields(SimConfig)}
_TUPLE_FIELDS = {("run", "algorithms"), ("run", "sweep")}


def _merge(base: dict, extra: dict) -> dict:
    out = {k: dict(v) if isinstance(v, dict) else v for k, v in base.items()}
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key].update(value)
        else:
            out[key] = value
    return out


def from_dict(data: dict | None) -> SimConfig:
    data = data or {}
    if not isinstance(data, dict):
        raise InvalidConfigError("config document must be a mapping")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise InvalidConfigError(f"unknown config section(s): {', '.join(sorted(unknown))}")
    sections = {}
    for name, factory in _SECTIONS.items():
        cls = type(factory())
        values = data.get(name) or {}
        if not isinstance(values, dict):
            raise InvalidConfigError(f"section {name!r} must be a mapping")
        allowed = {f.name for f in dataclasses.fields(cls)}
        bad = set(values) - allowed
        if bad:
            raise InvalidConfigError(f"unknown key(s) in {name}: {', '.join(sorted(bad))}")
        values = {k: (tuple(v) if (name, k) in _TUPLE_FIELDS and v is not None else v)
                  for k, v in values.items()}
        try:
            sections[name] = cls(**values)
        except (TypeError, ValueError) as exc:
            raise InvalidConfigError(f"{name}: {exc}") from None
    try:
        return SimConfig(**sections).validate()
    except TypeError as exc:
        raise InvalidConfigError(f"ill-typed config value: {exc}") from None


def load_config(path: str | Path | None = None) -> SimConfig:
    if path is None:
        return SimConfig().validate()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InvalidConfigError(f"{path}: not valid YAML ({exc.__class__.__name__})") from None
    return from_dict(data)
