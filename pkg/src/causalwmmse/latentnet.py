"""The hidden sub-network: a power policy q = Zp that reacts to the known powers."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .netgen import NetworkInstance


@dataclass(frozen=True)
class LatentPolicy:
    mixing: np.ndarray  # Z, shape (|K-|, K)
    q_max: float = 0.2
    noise_halfwidth: float = 0.1

    def __post_init__(self):
        if self.q_max <= 0:
            raise ValueError("q_max must be > 0")
        if self.noise_halfwidth < 0:
            raise ValueError("noise_halfwidth must be >= 0")

    @property
    def n_latent(self) -> int:
        return self.mixing.shape[0]

    @classmethod
    def random(cls, n_latent: int, n_known: int, rng: np.random.Generator, *,
               q_max: float = 0.2, noise_halfwidth: float = 0.1) -> "LatentPolicy":
        return cls(rng.uniform(-1.0, 1.0, size=(n_latent, n_known)), q_max, noise_halfwidth)

    def head(self, n: int) -> "LatentPolicy":
        """Policy restricted to the first ``n`` latent links."""
        return LatentPolicy(self.mixing[:n], self.q_max, self.noise_halfwidth)

    def draw_jitter(self, rng: np.random.Generator, size=None) -> np.ndarray:
        shape = (self.n_latent,) if size is None else (*np.atleast_1d(size), self.n_latent)
        return rng.uniform(-self.noise_halfwidth, self.noise_halfwidth, size=shape)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"p{j}" for j in range(self.mixing.shape[1])])
            for row in self.mixing:
                writer.writerow([repr(float(z)) for z in row])

    @classmethod
    def from_csv(cls, path, *, q_max: float = 0.2, noise_halfwidth: float = 0.1) -> "LatentPolicy":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        ncol = len(rows[0])
        mixing = np.array([[float(x) for x in r] for r in rows[1:]]).reshape(-1, ncol)
        return cls(mixing, q_max, noise_halfwidth)


def apply_policy(policy: LatentPolicy, p: np.ndarray, jitter: np.ndarray) -> np.ndarray:
    """q_i = clip([Zp]_i * (1 + jitter_i), 0, q_max)."""
    return np.clip((policy.mixing @ p) * (1.0 + jitter), 0.0, policy.q_max)


def step_policy(policy: LatentPolicy, p: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
    if rng is None or policy.noise_halfwidth == 0:
        jitter = np.zeros(policy.n_latent)
    else:
        jitter = policy.draw_jitter(rng)
    return apply_policy(policy, p, jitter)


@dataclass(frozen=True)
class InterferenceObservation:
    total: np.ndarray  # I_k, full denominator of u_k
    hidden: np.ndarray  # eta_k, latent interference plus noise


def observe_interference(net: NetworkInstance, p: np.ndarray, q: np.ndarray) -> InterferenceObservation:
    hidden = net.gain_latent.T @ q + net.noise_known if net.n_latent else net.noise_known.copy()
    total = net.gain_known.T @ p + hidden
    return InterferenceObservation(total=total, hidden=hidden)
