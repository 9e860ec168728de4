"""Random indoor topologies and path-loss based channel gains.

Transmitters are dropped uniformly in a disk, each receiver uniformly in a
smaller disk around its own transmitter.  Gains come from a dual-slope
log-distance model with a LOS/NLOS mixture, lognormal shadowing and an
optional blockage penalty.  Everything is a pure function of its seed.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class InvalidConfigError(ValueError):
    pass


def fspl_1m_db(frequency_ghz: float) -> float:
    """Free-space path loss at the 1 m reference distance."""
    return 32.4 + 20.0 * math.log10(frequency_ghz)


@dataclass(frozen=True)
class PathLossParams:
    # Defaults approximate the InH shopping-mall NLOS dual-slope fit at 60 GHz.
    # They are implementer-supplied, not values taken from a measurement table.
    frequency_ghz: float = 60.0
    intercept_db: float = field(default_factory=lambda: round(fspl_1m_db(60.0), 4))
    slope1_exponent: float = 2.43
    slope2_exponent: float = 8.36
    breakpoint_distance: float = 110.0
    shadow_sigma_db: float = 2.9
    los_exponent: float = 1.73
    los_shadow_sigma_db: float = 3.0
    # P_LOS(d): 1 below los_d1, exp(-(d-d1)/c1) up to los_d2, then a*exp(-(d-d2)/c2)
    los_d1: float = 1.2
    los_d2: float = 6.5
    los_c1: float = 4.7
    los_c2: float = 32.6
    los_far_scale: float = 0.32
    blockage_probability: float = 0.1
    blockage_db: float = 10.0

    def __post_init__(self):
        if not self.breakpoint_distance > 0:
            raise InvalidConfigError("breakpoint_distance must be > 0")
        if self.shadow_sigma_db < 0 or self.los_shadow_sigma_db < 0:
            raise InvalidConfigError("shadowing sigma must be >= 0")
        if min(self.slope1_exponent, self.slope2_exponent, self.los_exponent) < 0:
            raise InvalidConfigError("path-loss exponents must be >= 0")
        if not 0.0 <= self.blockage_probability <= 1.0:
            raise InvalidConfigError("blockage_probability must lie in [0, 1]")
        if not 0.0 <= self.los_far_scale <= 1.0:
            raise InvalidConfigError("los_far_scale must lie in [0, 1]")


@dataclass(frozen=True)
class Geometry:
    tx_positions: np.ndarray  # (N, 2) meters
    rx_positions: np.ndarray  # (N, 2) meters
    n_known: int
    deployment_radius: float
    rx_radius: float

    @property
    def n_links(self) -> int:
        return len(self.tx_positions)

    @property
    def n_latent(self) -> int:
        return self.n_links - self.n_known

    def distances(self, min_distance: float = 0.0) -> np.ndarray:
        """Matrix d[j, k] = |tx_j - rx_k|, floored at ``min_distance``."""
        diff = self.tx_positions[:, None, :] - self.rx_positions[None, :, :]
        return np.maximum(np.hypot(diff[..., 0], diff[..., 1]), min_distance)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["link", "role", "tx_x", "tx_y", "rx_x", "rx_y"])
            for i, (tx, rx) in enumerate(zip(self.tx_positions, self.rx_positions)):
                role = "known" if i < self.n_known else "latent"
                writer.writerow([i, role, *(repr(float(c)) for c in (*tx, *rx))])


@dataclass(frozen=True)
class NetworkInstance:
    """Channel snapshot over the union of known and latent links.

    ``gain[j, k]`` is the linear power gain from transmitter ``j`` to
    receiver ``k``.  Known links are always listed first.
    """

    gain: np.ndarray
    known_links: np.ndarray
    latent_links: np.ndarray
    noise_power: np.ndarray  # per link, all of K+ and K-
    max_power: np.ndarray  # per known link
    weights: np.ndarray  # per known link
    geometry: Geometry | None = None

    def __post_init__(self):
        g = self.gain
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("gain must be a square matrix")
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ValueError("gain entries must be finite and nonnegative")
        if np.intersect1d(self.known_links, self.latent_links).size:
            raise ValueError("known and latent link sets must be disjoint")
        k = self.known_links
        if np.any(g[k, k] <= 0):
            raise ValueError("direct gains of known links must be positive")
        if np.any(self.noise_power <= 0) or np.any(self.max_power <= 0):
            raise ValueError("noise and max power must be positive")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")

    @property
    def K(self) -> int:
        return len(self.known_links)

    @property
    def n_latent(self) -> int:
        return len(self.latent_links)

    @cached_property
    def gain_known(self) -> np.ndarray:
        """K x K gains among known links."""
        return np.ascontiguousarray(self.gain[np.ix_(self.known_links, self.known_links)])

    @cached_property
    def gain_latent(self) -> np.ndarray:
        """|K-| x K gains from latent transmitters to known receivers."""
        return np.ascontiguousarray(self.gain[np.ix_(self.latent_links, self.known_links)])

    @cached_property
    def direct_amplitude(self) -> np.ndarray:
        return np.sqrt(np.diag(self.gain_known))

    @cached_property
    def noise_known(self) -> np.ndarray:
        return self.noise_power[self.known_links]

    def with_latent(self, n: int) -> "NetworkInstance":
        """Same channel with only the first ``n`` latent links switched on."""
        if n > self.n_latent:
            raise ValueError(f"instance has only {self.n_latent} latent links")
        keep = np.concatenate([self.known_links, self.latent_links[:n]])
        geom = self.geometry
        if geom is not None:
            geom = Geometry(geom.tx_positions[keep], geom.rx_positions[keep], geom.n_known,
                            geom.deployment_radius, geom.rx_radius)
        K = self.K
        return NetworkInstance(
            gain=self.gain[np.ix_(keep, keep)].copy(),
            known_links=np.arange(K),
            latent_links=np.arange(K, K + n),
            noise_power=self.noise_power[keep].copy(),
            max_power=self.max_power.copy(),
            weights=self.weights.copy(),
            geometry=geom,
        )

    def gains_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["tx", "rx", "gain"])
            n = self.gain.shape[0]
            for j in range(n):
                for k in range(n):
                    writer.writerow([j, k, repr(float(self.gain[j, k]))])


def _disk_points(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def generate_topology(n_known: int, n_latent: int, seed: int, *,
                      deployment_radius: float = 200.0, rx_radius: float = 25.0) -> Geometry:
    if n_known < 0 or n_latent < 0:
        raise InvalidConfigError("link counts must be >= 0")
    n = n_known + n_latent
    if n and (deployment_radius <= 0 or rx_radius <= 0):
        raise InvalidConfigError("deployment and receiver radii must be > 0")
    rng = np.random.default_rng(seed)
    tx = _disk_points(rng, n, deployment_radius)
    rx = tx + _disk_points(rng, n, rx_radius)
    return Geometry(tx, rx, n_known, float(deployment_radius), float(rx_radius))


def nlos_path_loss_db(distance, params: PathLossParams):
    """Deterministic dual-slope NLOS loss, continuous at the breakpoint."""
    d = np.asarray(distance, dtype=float)
    bp = params.breakpoint_distance
    near = params.intercept_db + 10.0 * params.slope1_exponent * np.log10(np.minimum(d, bp))
    far = 10.0 * params.slope2_exponent * np.log10(np.maximum(d, bp) / bp)
    return near + far


def los_probability(distance, params: PathLossParams):
    d = np.asarray(distance, dtype=float)
    mid = np.exp(-(d - params.los_d1) / params.los_c1)
    far = params.los_far_scale * np.exp(-(d - params.los_d2) / params.los_c2)
    return np.where(d <= params.los_d1, 1.0, np.where(d < params.los_d2, mid, far))


def path_loss_db(distance, params: PathLossParams, rng: np.random.Generator | None = None):
    """Path loss in dB for scalar or array distances.

    With ``rng=None`` only the deterministic NLOS dual-slope curve is
    returned.  Otherwise each distance draws, in order, a LOS indicator,
    a shadowing term and a blockage indicator.
    """
    d = np.asarray(distance, dtype=float)
    if np.any(~(d > 0)):
        raise ValueError("distance must be > 0")
    pl = nlos_path_loss_db(d, params)
    if rng is not None:
        los = rng.random(d.shape) < los_probability(d, params)
        shadow = rng.standard_normal(d.shape)
        blocked = rng.random(d.shape) < params.blockage_probability
        los_pl = params.intercept_db + 10.0 * params.los_exponent * np.log10(d)
        pl = np.where(los, np.minimum(los_pl, pl), pl)
        pl = pl + shadow * np.where(los, params.los_shadow_sigma_db, params.shadow_sigma_db)
        pl = pl + np.where(blocked, params.blockage_db, 0.0)
    return float(pl) if pl.ndim == 0 else pl


def db_to_linear(db):
    return np.power(10.0, -np.asarray(db, dtype=float) / 10.0)


def linear_to_db(gain):
    return -10.0 * np.log10(np.asarray(gain, dtype=float))


def thermal_noise_watts(bandwidth_hz: float, noise_figure_db: float,
                        psd_dbm_hz: float = -174.0) -> float:
    dbm = psd_dbm_hz + 10.0 * math.log10(bandwidth_hz) + noise_figure_db
    return 10.0 ** ((dbm - 30.0) / 10.0)


def build_gains(geometry: Geometry, params: PathLossParams, seed: int | None, *,
                noise_power: float, max_power: float, weight: float = 1.0,
                min_distance: float = 1.0) -> NetworkInstance:
    """Assemble a NetworkInstance; ``seed=None`` switches all randomness off."""
    d = geometry.distances(min_distance)
    rng = None if seed is None else np.random.default_rng(seed)
    gain = db_to_linear(path_loss_db(d, params, rng)) if d.size else np.zeros((0, 0))
    n, K = geometry.n_links, geometry.n_known
    return NetworkInstance(
        gain=np.atleast_2d(gain).reshape(n, n),
        known_links=np.arange(K),
        latent_links=np.arange(K, n),
        noise_power=np.full(n, float(noise_power)),
        max_power=np.full(K, float(max_power)),
        weights=np.full(K, float(weight)),
        geometry=geometry,
    )
