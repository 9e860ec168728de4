"""Block-coordinate WMMSE power control with observed (or ignored) hidden interference."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .latentnet import InterferenceObservation
from .netgen import NetworkInstance

# |u h v| is clamped here before w = 1 / (1 - |u h v|)
W_GUARD = 1.0 - 1e-12

Observer = Callable[[np.ndarray], InterferenceObservation]


class EtaMode(enum.Enum):
    OBSERVED = "observed"
    LOCAL = "local"  # eta_k replaced by the receiver noise sigma_k^2


@dataclass
class WmmseState:
    u: np.ndarray
    w: np.ndarray
    v: np.ndarray
    iteration: int = 0

    @property
    def power(self) -> np.ndarray:
        return self.v * self.v

    def copy(self) -> "WmmseState":
        return WmmseState(self.u.copy(), self.w.copy(), self.v.copy(), self.iteration)


def effective_eta(net: NetworkInstance, obs: InterferenceObservation, mode: EtaMode) -> np.ndarray:
    return obs.hidden if mode is EtaMode.OBSERVED else net.noise_known


def init_state(net: NetworkInstance, seed, observe: Observer | None = None,
               mode: EtaMode = EtaMode.OBSERVED) -> WmmseState:
    """Random amplitudes in (0, sqrt(p_max)], then one u/w pass at those amplitudes."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    v = np.sqrt(net.max_power) * (1.0 - rng.random(net.K))
    if observe is None:
        eta = net.noise_known
    else:
        eta = effective_eta(net, observe(v * v), mode)
    h = net.direct_amplitude
    u = h * v / (net.gain_known.T @ (v * v) + eta)
    w = 1.0 / (1.0 - np.minimum(u * h * v, W_GUARD))
    return WmmseState(u, w, v, 0)


def update_u(net: NetworkInstance, state: WmmseState, eta_k: float, k: int,
             denominator: float | None = None) -> float:
    """MMSE receive coefficient; ``denominator`` overrides the observed I_k."""
    if denominator is None:
        v = state.v
        denominator = net.gain_known[:, k] @ (v * v) + eta_k
    return net.direct_amplitude[k] * state.v[k] / denominator


def update_w(net: NetworkInstance, state: WmmseState, k: int) -> float:
    uhv = min(abs(state.u[k] * net.direct_amplitude[k] * state.v[k]), W_GUARD)
    return 1.0 / (1.0 - uhv)


def constrained_amplitude(num: float, den: float, p_max: float,
                          rel_tol: float = 1e-15, max_iter: int = 200) -> tuple[float, float]:
    """Return (v, lambda) for v = num / (den + lambda) under v^2 <= p_max.

    lambda is zero when the unconstrained value is feasible, otherwise it is
    found by bisection on the decreasing map lambda -> v(lambda)^2.
    """
    cap = math.sqrt(p_max)
    if num <= 0.0:
        return 0.0, 0.0
    if den > 0.0 and num / den <= cap:
        return num / den, 0.0
    lo, hi = 0.0, max(den, 1.0)
    while num / (den + hi) > cap:
        lo, hi = hi, 2.0 * hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= rel_tol * hi:
            break
        if num / (den + mid) > cap:
            lo = mid
        else:
            hi = mid
    return num / (den + hi), hi


def update_v(net: NetworkInstance, state: WmmseState, k: int) -> float:
    a = net.weights
    num = a[k] * net.direct_amplitude[k] * state.u[k] * state.w[k]
    den = (a * state.w * state.u * state.u) @ net.gain_known[k]
    v, _ = constrained_amplitude(num, den, net.max_power[k])
    return v


BlockHook = Callable[[str, int, WmmseState], None]


def update_link(net: NetworkInstance, state: WmmseState, k: int, eta_k: float,
                denominator: float | None = None, on_block: BlockHook | None = None) -> None:
    """In-place u, w, v update of link k (Gauss-Seidel order)."""
    state.u[k] = update_u(net, state, eta_k, k, denominator)
    if on_block is not None:
        on_block("u", k, state)
    state.w[k] = update_w(net, state, k)
    if on_block is not None:
        on_block("w", k, state)
    state.v[k] = update_v(net, state, k)
    if on_block is not None:
        on_block("v", k, state)


def wmmse_iterate(net: NetworkInstance, state: WmmseState, observe: Observer,
                  mode: EtaMode = EtaMode.OBSERVED, on_block: BlockHook | None = None) -> WmmseState:
    """One sweep over all known links; eta is observed once at the top."""
    obs = observe(state.power)
    eta = effective_eta(net, obs, mode)
    new = state.copy()
    for k in range(net.K):
        update_link(net, new, k, eta[k], on_block=on_block)
    new.iteration += 1
    return new


def rate_from_observation(net: NetworkInstance, p: np.ndarray, obs: InterferenceObservation) -> float:
    """Weighted sum rate using the measured denominators I_k."""
    signal = np.diag(net.gain_known) * p
    return float(net.weights @ np.log1p(signal / (obs.total - signal)))


@dataclass
class SolveResult:
    state: WmmseState
    history: list = field(default_factory=list)  # (iteration, wsr, power)
    converged: bool = False


def has_converged(values, tol: float = 1e-8, patience: int = 5) -> bool:
    """Relative change below ``tol`` over the last ``patience`` sweeps."""
    if len(values) <= patience:
        return False
    tail = np.asarray(values[-(patience + 1):], dtype=float)
    rel = np.abs(np.diff(tail)) / np.maximum(np.abs(tail[1:]), 1e-300)
    return bool(np.all(rel < tol))


def solve(net: NetworkInstance, observe: Observer, state: WmmseState, *,
          mode: EtaMode = EtaMode.OBSERVED, max_iter: int = 500,
          tol: float = 1e-8, patience: int = 5) -> SolveResult:
    result = SolveResult(state)
    rates = []
    for _ in range(max_iter):
        state = wmmse_iterate(net, state, observe, mode)
        p = state.power
        rates.append(rate_from_observation(net, p, observe(p)))
        result.history.append((state.iteration, rates[-1], p))
        if has_converged(rates, tol, patience):
            result.converged = True
            break
    result.state = state
    return result


__all__ = [
    "EtaMode", "WmmseState", "init_state", "update_u", "update_w", "update_v",
    "constrained_amplitude", "update_link", "wmmse_iterate", "rate_from_observation",
    "solve", "has_converged", "W_GUARD",
]
