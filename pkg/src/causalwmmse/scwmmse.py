"""WMMSE with epsilon-greedy counterfactual receive updates.

At each sweep every link flips a biased coin with bias eps(t).  Heads:
its receive coefficient is computed against the synthetic-control
estimate of its interference.  Tails: the ordinary WMMSE update.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netgen import NetworkInstance
from .synthctl import ScEstimator, infer
from .wmmse import EtaMode, Observer, WmmseState, effective_eta, update_link


@dataclass(frozen=True)
class EpsilonSchedule:
    a: float = 0.2
    b: float = 2.0
    t_max: int = 500

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise ValueError("a must lie in [0, 1]")
        if self.b <= 0:
            raise ValueError("b must be > 0")
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")


def epsilon(schedule: EpsilonSchedule, t: float) -> float:
    """[a (1 - t / t_max)]^b, with t clipped to [0, t_max]."""
    t = min(max(t, 0), schedule.t_max)
    return (schedule.a * (1.0 - t / schedule.t_max)) ** schedule.b


def expected_counterfactual_updates(schedule: EpsilonSchedule, n_sweeps: int | None = None) -> float:
    """Expected number of heads per link over sweeps t = 0 .. n_sweeps - 1."""
    n = schedule.t_max if n_sweeps is None else n_sweeps
    return float(sum(epsilon(schedule, t) for t in range(n)))


def sc_wmmse_iterate(net: NetworkInstance, state: WmmseState, estimator: ScEstimator,
                     observe: Observer, schedule: EpsilonSchedule, rng: np.random.Generator, *,
                     dirichlet_rng: np.random.Generator | None = None,
                     counterfactual_log: list | None = None) -> WmmseState:
    """One sweep; ``rng`` supplies one uniform per link per sweep.

    The uniforms are drawn whatever eps is, so changing the schedule never
    shifts any other random stream.
    """
    if estimator.K != net.K:
        raise ValueError("estimator was trained on a different number of links")
    obs = observe(state.power)
    eta = effective_eta(net, obs, EtaMode.OBSERVED)
    eps = epsilon(schedule, state.iteration)
    coins = rng.random(net.K)
    new = state.copy()
    GT = net.gain_known.T
    taken = []
    for k in range(net.K):
        denominator = None
        if coins[k] < eps:
            # donors' interference at the current powers
            current = GT @ (new.v * new.v) + eta
            mu = np.delete(current, k)
            estimate = infer(estimator, k, mu, dirichlet_rng)
            if estimate > 0 and np.isfinite(estimate):
                denominator = estimate
                taken.append(k)
        update_link(net, new, k, eta[k], denominator)
    new.iteration += 1
    if counterfactual_log is not None:
        counterfactual_log.append(taken)
    return new
