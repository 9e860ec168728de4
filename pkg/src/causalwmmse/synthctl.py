"""Synthetic-control estimators of a link's interference from its donors.

For link k the donors are all other known links.  Training solves

    nu_k = argmin_{beta in simplex} || x_k - X_{-k} beta ||_2

over a panel of past observations; inference returns nu_k . mu_k for the
donors' current interference mu_k.  Three ablations replace the simplex
fit: unconstrained least squares (FREE), the simplex barycentre (CENTER)
and a fresh Dirichlet draw at every use (DIRICH).
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .latentnet import LatentPolicy, apply_policy, observe_interference
from .netgen import NetworkInstance


class PanelDataError(ValueError):
    pass


class Variant(enum.Enum):
    CONV = "conv"
    FREE = "free"
    CENTER = "center"
    DIRICH = "dirich"


@dataclass(frozen=True)
class PanelData:
    observations: np.ndarray  # (L, K)
    link_ids: tuple | None = None

    def __post_init__(self):
        X = np.asarray(self.observations, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 2:
            raise PanelDataError("panel needs at least one row and two links")
        if not np.all(np.isfinite(X)):
            raise PanelDataError("panel contains non-finite entries")
        if np.any(X < 0):
            raise PanelDataError("panel contains negative interference")
        object.__setattr__(self, "observations", X)

    @property
    def L(self) -> int:
        return self.observations.shape[0]

    @property
    def K(self) -> int:
        return self.observations.shape[1]

    def split(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(x_k, X_{-k})."""
        X = self.observations
        return X[:, k], np.delete(X, k, axis=1)

    def to_csv(self, path) -> None:
        ids = self.link_ids or tuple(range(self.K))
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(ids)
            for row in self.observations:
                writer.writerow([repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path) -> "PanelData":
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if len(rows) < 2:
            raise PanelDataError(f"{path}: expected a header and at least one row")
        try:
            data = np.array([[float(x) for x in r] for r in rows[1:]])
        except ValueError as exc:
            raise PanelDataError(f"{path}: {exc}") from None
        if data.shape[1] != len(rows[0]):
            raise PanelDataError(f"{path}: ragged rows")
        return cls(data, tuple(rows[0]))


def collect_panel(net: NetworkInstance, policy: LatentPolicy | None, L: int, seed,
                  return_log: bool = False):
    """Observe interference under uniformly random known powers.

    Each row draws p ~ U(prod [0, p_max]), steps the latent policy once
    with fresh jitter and records I_k for every known link.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    K = net.K
    P = rng.random((L, K)) * net.max_power
    rows, qs = [], []
    for p in P:
        if policy is not None and policy.n_latent:
            q = apply_policy(policy, p, policy.draw_jitter(rng))
        else:
            q = np.zeros(net.n_latent)
        rows.append(observe_interference(net, p, q).total)
        qs.append(q)
    panel = PanelData(np.array(rows).reshape(L, K))
    if return_log:
        return panel, P, np.array(qs).reshape(L, -1)
    return panel


def project_simplex(y) -> np.ndarray:
    """Euclidean projection onto {b >= 0, sum b = 1} (sort and threshold)."""
    y = np.asarray(y, dtype=float)
    n = y.size
    s = np.sort(y)[::-1]
    css = np.cumsum(s) - 1.0
    idx = np.arange(1, n + 1)
    rho = np.nonzero(s - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(y - theta, 0.0)


def residual_norm(panel: PanelData, k: int, beta) -> float:
    x, Xd = panel.split(k)
    return float(np.linalg.norm(x - Xd @ np.asarray(beta, dtype=float)))


def _largest_eigenvalue(G: np.ndarray, steps: int = 100) -> float:
    b = np.ones(G.shape[0]) / math.sqrt(G.shape[0])
    lam = 0.0
    for _ in range(steps):
        z = G @ b
        nz = np.linalg.norm(z)
        if nz == 0:
            return 0.0
        lam = float(b @ z)
        b = z / nz
    # power iteration approaches from below; the trace bound keeps the step safe
    return min(float(np.trace(G)), max(lam, float(b @ G @ b)) * 1.01)


def _support_polish(x: np.ndarray, D: np.ndarray, beta: np.ndarray,
                    tol: float = 1e-12) -> np.ndarray | None:
    """Exact minimiser on the support of ``beta``, if it passes the KKT test.

    Moves within {sum b = 1} from the current point along the null space of
    the all-ones vector; the minimum-norm step keeps rank-deficient donor sets
    close to the feasible iterate.
    """
    S = np.flatnonzero(beta > tol)
    m = S.size
    cand = np.zeros_like(beta)
    if m == 1:
        cand[S] = 1.0
    else:
        # orthonormal basis of {z : sum z = 0}
        N = np.linalg.svd(np.ones((1, m)))[2][1:].T
        b0 = beta[S] / beta[S].sum()
        DS = D[:, S]
        gamma = np.linalg.lstsq(DS @ N, x - DS @ b0, rcond=None)[0]
        cand[S] = b0 + N @ gamma
        if not np.all(np.isfinite(cand)) or np.any(cand[S] < 0):
            return None
    grad = D.T @ (D @ cand - x)
    tau = -float(np.mean(grad[S]))
    scale = max(1.0, float(np.max(np.abs(D.T @ x))))
    if np.any(grad + tau < -1e-9 * scale):
        return None
    return cand


def fit_conv(panel: PanelData, k: int, *, tol: float = 1e-10, max_iter: int = 100_000) -> np.ndarray:
    """Simplex-constrained least squares by accelerated projected gradient."""
    x, Xd = panel.split(k)
    m = Xd.shape[1]
    if m == 1:
        return np.ones(1)
    scale = float(np.max(np.abs(panel.observations))) or 1.0
    x, Xd = x / scale, Xd / scale
    xx = float(x @ x)

    def obj(b):
        r = Xd @ b - x
        return 0.5 * float(r @ r)

    def grad(b):
        return Xd.T @ (Xd @ b - x)

    lip = _largest_eigenvalue(Xd.T @ Xd)
    beta = np.full(m, 1.0 / m)
    if lip <= 0:
        return beta
    step = 1.0 / lip
    y, t = beta.copy(), 1.0
    f_old = obj(beta)
    for _ in range(max_iter):
        nxt = project_simplex(y - step * grad(y))
        f_new = obj(nxt)
        if f_new > f_old:
            # restart momentum when the objective goes up
            y, t = beta.copy(), 1.0
            nxt = project_simplex(beta - step * grad(beta))
            f_new = obj(nxt)
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = nxt + ((t - 1.0) / t_next) * (nxt - beta)
        beta, t = nxt, t_next
        done = abs(f_old - f_new) <= tol * abs(f_old) or f_new <= 1e-30 * max(xx, 1.0)
        if done and f_new > 1e-30 * max(xx, 1.0):
            # momentum can park the iterate on a vertex; stop only if a plain step agrees
            probe = project_simplex(beta - step * grad(beta))
            if obj(probe) < f_new - tol * abs(f_new):
                done = False
                y, t = beta.copy(), 1.0
        f_old = f_new
        if done:
            break
    polished = _support_polish(x, Xd, beta)
    if polished is not None:
        polished = project_simplex(polished)
        if obj(polished) <= obj(beta):
            beta = polished
    return project_simplex(beta)


def fit_free(panel: PanelData, k: int, *, ridge: float = 1e-10) -> np.ndarray:
    """Least squares through the normal equations with a small ridge."""
    x, Xd = panel.split(k)
    scale = float(np.max(np.abs(panel.observations))) or 1.0
    x, Xd = x / scale, Xd / scale
    G = Xd.T @ Xd + ridge * np.eye(Xd.shape[1])
    return np.linalg.solve(G, Xd.T @ x)


@dataclass(frozen=True)
class ScEstimator:
    coefficients: np.ndarray  # (K, K-1), row k holds nu_k over the donors of k
    residuals: np.ndarray  # per-link training RMS
    variant: Variant = Variant.CONV
    dirichlet_alpha: float = 1.0

    @property
    def K(self) -> int:
        return self.coefficients.shape[0]

    def weights_for(self, k: int, rng: np.random.Generator | None = None) -> np.ndarray:
        if self.variant is Variant.DIRICH:
            if rng is None:
                raise ValueError("the Dirichlet variant needs a random generator")
            return rng.dirichlet(np.full(self.K - 1, self.dirichlet_alpha))
        return self.coefficients[k]

    def to_csv(self, path, link_ids=None) -> None:
        ids = list(link_ids) if link_ids is not None else list(range(self.K))
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["link", *ids, "residual"])
            for k in range(self.K):
                row = [repr(float(c)) for c in self.coefficients[k]]
                row.insert(k, "")
                writer.writerow([ids[k], *row, repr(float(self.residuals[k]))])


def train(panel: PanelData, variant: Variant = Variant.CONV, *, tol: float = 1e-10,
          max_iter: int = 100_000, ridge: float = 1e-10, dirichlet_alpha: float = 1.0) -> ScEstimator:
    K = panel.K
    coef = np.empty((K, K - 1))
    for k in range(K):
        if variant is Variant.CONV:
            coef[k] = fit_conv(panel, k, tol=tol, max_iter=max_iter)
        elif variant is Variant.FREE:
            coef[k] = fit_free(panel, k, ridge=ridge)
        else:
            # DIRICH keeps the barycentre as its stored (mean) coefficients
            coef[k] = 1.0 / (K - 1)
    rms = np.array([residual_norm(panel, k, coef[k]) for k in range(K)]) / math.sqrt(panel.L)
    return ScEstimator(coef, rms, variant, dirichlet_alpha)


def infer(estimator: ScEstimator, k: int, mu, rng: np.random.Generator | None = None) -> float:
    """Counterfactual I_k from the donors' current interference ``mu``."""
    return float(estimator.weights_for(k, rng) @ np.asarray(mu, dtype=float))
