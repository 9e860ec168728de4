"""Independent reference computations used by the tests.

Nothing here calls into the package's solvers; each routine recomputes a
quantity the slow, obvious way.
"""
import itertools
import math

import numpy as np


def golden_section(f, lo, hi, tol=1e-30, max_iter=400, digits=50):
    """Golden-section search carried out in ``digits``-digit arithmetic.

    Double precision cannot place a smooth minimiser closer than about
    sqrt(machine eps), so ``f`` receives mpmath numbers.
    """
    import mpmath

    mpmath.mp.dps = digits
    invphi = (mpmath.sqrt(5) - 1) / 2
    a, b = mpmath.mpf(lo), mpmath.mpf(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return float((a + b) / 2)


def scalar_rate(gain, p, q, noise, k, n_known):
    """R_k by explicit loops over a full (K+ + K-) gain matrix."""
    interference = 0.0
    for j in range(n_known):
        if j != k:
            interference += gain[j][k] * p[j]
    for i in range(len(q)):
        interference += gain[n_known + i][k] * q[i]
    return math.log(1.0 + gain[k][k] * p[k] / (interference + noise[k]))


def scalar_observation(gain, p, q, noise, n_known):
    totals, hidden = [], []
    for k in range(n_known):
        eta = noise[k]
        for i in range(len(q)):
            eta += gain[n_known + i][k] * q[i]
        tot = eta
        for j in range(n_known):
            tot += gain[j][k] * p[j]
        totals.append(tot)
        hidden.append(eta)
    return np.array(totals), np.array(hidden)


def symbolic_mse(gain_known, u, v, eta, k):
    """e_k by expanding the quadratic symbolically and substituting numbers."""
    import sympy as sp

    K = len(v)
    us = sp.Symbol("u")
    vs = sp.symbols(f"v0:{K}")
    hs = sp.symbols(f"h0:{K}")
    es = sp.Symbol("eta")
    expr = (us * hs[k] * vs[k] - 1) ** 2
    for j in range(K):
        if j != k:
            expr += (us * hs[j] * vs[j]) ** 2
    expr = sp.expand(expr + es * us ** 2)
    subs = {us: sp.Float(u[k], 30), es: sp.Float(eta, 30)}
    subs.update({vs[j]: sp.Float(v[j], 30) for j in range(K)})
    subs.update({hs[j]: sp.Float(math.sqrt(gain_known[j][k]), 30) for j in range(K)})
    return float(expr.subs(subs))


def path_loss_reference(d, intercept, n1, n2, bp):
    if d <= bp:
        return intercept + 10.0 * n1 * math.log10(d)
    return intercept + 10.0 * n1 * math.log10(bp) + 10.0 * n2 * math.log10(d / bp)


def simplex_grid(m, step):
    """All points of the (m-1)-simplex on a lattice with the given step."""
    n = int(round(1.0 / step))
    for combo in itertools.product(range(n + 1), repeat=m - 1):
        s = sum(combo)
        if s <= n:
            yield np.array([*combo, n - s], dtype=float) / n


def grid_best_residual(x, X, step):
    """Smallest ||x - X b|| over the simplex lattice, by exhaustive evaluation."""
    B = np.array(list(simplex_grid(X.shape[1], step)))
    res = np.linalg.norm(x[:, None] - X @ B.T, axis=0)
    i = int(np.argmin(res))
    return float(res[i]), B[i]


def simplex_projection_by_supports(y):
    """Exact Euclidean projection by enumerating every candidate support."""
    y = np.asarray(y, dtype=float)
    n = y.size
    best, arg = math.inf, None
    for size in range(1, n + 1):
        for S in itertools.combinations(range(n), size):
            S = list(S)
            # minimise |b - y|^2 on the support subject to sum b = 1
            b = np.zeros(n)
            b[S] = y[S] + (1.0 - y[S].sum()) / size
            if np.any(b < -1e-15):
                continue
            d = float(np.sum((b - y) ** 2))
            if d < best:
                best, arg = d, np.maximum(b, 0.0)
    return arg


def normal_quantile_erf(prob, lo=-10.0, hi=10.0):
    """Inverse standard-normal CDF by bisection on 0.5 * (1 + erf(x / sqrt 2))."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 0.5 * (1.0 + math.erf(mid / math.sqrt(2.0))) < prob:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
