"""Rates, weighted sum rate and the weighted-MSE reformulation.

Rates are in nats per channel use.  Amplitudes are real and nonnegative,
h[j, k] = sqrt(gain[j, k]).  The MSE of receiver k uses its own receive
coefficient u_k on every term:

    e_k = (u_k h_kk v_k - 1)^2 + sum_{j != k} (u_k h_jk v_j)^2 + eta_k u_k^2
"""
from __future__ import annotations

import numpy as np

from .netgen import NetworkInstance


def _latent_rx(net: NetworkInstance, q) -> np.ndarray:
    if net.n_latent == 0:
        return np.zeros(net.K)
    return net.gain_latent.T @ np.asarray(q, dtype=float)


def sinr(net: NetworkInstance, p, q=None) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    G = net.gain_known
    signal = np.diag(G) * p
    interference = G.T @ p - signal + _latent_rx(net, q if q is not None else np.zeros(net.n_latent))
    return signal / (interference + net.noise_known)


def link_rates(net: NetworkInstance, p, q=None) -> np.ndarray:
    return np.log1p(sinr(net, p, q))


def link_rate(net: NetworkInstance, p, q, k: int) -> float:
    return float(link_rates(net, p, q)[k])


def weighted_sum_rate(net: NetworkInstance, p, q=None) -> float:
    return float(net.weights @ link_rates(net, p, q))


def mse_terms(net: NetworkInstance, u, v, eta) -> np.ndarray:
    """Vector of e_k for all known links."""
    u, v, eta = (np.asarray(a, dtype=float) for a in (u, v, eta))
    G = net.gain_known
    h = net.direct_amplitude
    # sum over all j of u_k^2 gain[j,k] v_j^2, then swap the j=k term for the signal error
    rx_power = G.T @ (v * v)
    direct = (u * h * v - 1.0) ** 2
    cross = u * u * (rx_power - h * h * v * v)
    return direct + cross + eta * u * u


def mse_term(net: NetworkInstance, state, eta_k: float, k: int) -> float:
    u_k = state.u[k]
    h = np.sqrt(net.gain_known[:, k])
    v = state.v
    err = (u_k * h[k] * v[k] - 1.0) ** 2
    others = np.delete(np.arange(net.K), k)
    err += np.sum((u_k * h[others] * v[others]) ** 2)
    return float(err + eta_k * u_k * u_k)


def reformulated_objective(net: NetworkInstance, state, eta) -> float:
    """sum_k alpha_k (w_k e_k - log w_k)."""
    e = mse_terms(net, state.u, state.v, eta)
    w = np.asarray(state.w, dtype=float)
    return float(net.weights @ (w * e - np.log(w)))
