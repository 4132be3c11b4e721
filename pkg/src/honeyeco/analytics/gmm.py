"""Diagonal-covariance Gaussian mixture fitted by expectation-maximization."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-6
_LOG_2PI = np.log(2.0 * np.pi)


class GmmError(RuntimeError):
    pass


@dataclass
class GmmModel:
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    seed: int
    converged: bool = False
    n_iter: int = 0
    log_likelihood: float = float("-inf")
    history: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def n_parameters(self) -> int:
        return (self.k - 1) + 2 * self.k * self.dim

    def bic(self, n_samples: int) -> float:
        return -2.0 * self.log_likelihood + self.n_parameters() * np.log(n_samples)

    def log_joint(self, X: np.ndarray) -> np.ndarray:
        """log(w_k) + log N(x_i | mu_k, diag var_k), shape (n, K)."""
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ValueError(f"feature dimension {X.shape[-1]} does not match model dimension {self.dim}")
        return _log_joint(X, self.weights, self.means, self.variances)

    def responsibilities(self, X: np.ndarray) -> np.ndarray:
        return _e_step(self.log_joint(X))[0]

    def score(self, X: np.ndarray) -> float:
        return _e_step(self.log_joint(X))[1]


def _log_joint(X, weights, means, variances):
    with np.errstate(divide="ignore"):
        log_w = np.log(weights)
    inv = 1.0 / variances
    # direct differences: the expanded-square form cancels badly at the floor
    maha = np.empty((X.shape[0], len(weights)))
    for k in range(len(weights)):
        diff = X - means[k]
        maha[:, k] = (diff * diff) @ inv[k]
    log_det = np.sum(np.log(variances), axis=1)
    return log_w - 0.5 * (X.shape[1] * _LOG_2PI + log_det + maha)


def _e_step(log_joint: np.ndarray) -> tuple[np.ndarray, float]:
    top = np.max(log_joint, axis=1, keepdims=True)
    lse = top + np.log(np.sum(np.exp(log_joint - top), axis=1, keepdims=True))
    resp = np.exp(log_joint - lse)
    resp /= resp.sum(axis=1, keepdims=True)
    return resp, float(np.sum(lse))


def _m_step(X: np.ndarray, resp: np.ndarray, floor: float):
    nk = resp.sum(axis=0) + 10 * np.finfo(float).eps
    weights = nk / nk.sum()
    means = (resp.T @ X) / nk[:, None]
    variances = np.empty_like(means)
    for k in range(resp.shape[1]):
        diff = X - means[k]
        variances[k] = (resp[:, k] @ (diff * diff)) / nk[k]
    np.maximum(variances, floor, out=variances)
    return weights, means, variances


def kmeanspp_centers(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: first center uniform, then proportional to squared
    distance to the nearest chosen center."""
    n = X.shape[0]
    idx = [int(rng.integers(n))]
    d2 = np.sum((X - X[idx[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            nxt = int(rng.integers(n))
        else:
            nxt = int(rng.choice(n, p=d2 / total))
        idx.append(nxt)
        d2 = np.minimum(d2, np.sum((X - X[nxt]) ** 2, axis=1))
    return X[idx].copy()


def _fit_once(X, k, rng, seed, tol, max_iter, floor) -> GmmModel:
    n, d = X.shape
    means = kmeanspp_centers(X, k, rng)
    variances = np.tile(np.maximum(X.var(axis=0), floor), (k, 1))
    weights = np.full(k, 1.0 / k)

    resp, ll = _e_step(_log_joint(X, weights, means, variances))
    history = [ll]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        weights, means, variances = _m_step(X, resp, floor)
        resp, new_ll = _e_step(_log_joint(X, weights, means, variances))
        if not np.isfinite(new_ll) or not np.all(np.isfinite(means)):
            raise GmmError(f"numerical failure in EM iteration {it} (log-likelihood {new_ll})")
        history.append(new_ll)
        gain = new_ll - ll
        ll = new_ll
        if gain < tol:
            converged = True
            break
    return GmmModel(weights, means, variances, seed, converged, it, ll, history)


def fit_gmm(
    features: np.ndarray,
    k: int,
    seed: int,
    tol: float = 1e-6,
    max_iter: int = 500,
    n_init: int = 1,
    variance_floor: float = VARIANCE_FLOOR,
) -> GmmModel:
    """Fit a K-component diagonal GMM.

    Initialization is k-means++ from ``np.random.default_rng(seed)``; with
    ``n_init > 1`` the restarts draw from the same generator in sequence and
    the highest final log-likelihood wins (earliest restart on ties).
    Iteration stops when the log-likelihood gain drops below ``tol``.
    """
    X = np.asarray(features, dtype=float)
    if X.ndim != 2:
        raise ValueError("features must be a 2-D array")
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    if X.shape[0] < k:
        raise ValueError(f"cannot fit {k} components to {X.shape[0]} samples")
    if not np.all(np.isfinite(X)):
        raise GmmError("features contain NaN or infinite values")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, n_init)):
        model = _fit_once(X, k, rng, seed, tol, max_iter, variance_floor)
        if best is None or model.log_likelihood > best.log_likelihood:
            best = model
    log.debug("fit K=%d: ll=%.6f iter=%d converged=%s", k, best.log_likelihood, best.n_iter, best.converged)
    return best


def select_k(
    features: np.ndarray,
    k_range: Iterable[int],
    seed: int,
    **fit_kwargs,
) -> tuple[int, dict[int, float]]:
    """Fit every K in ``k_range`` and return the BIC minimizer (smallest K on
    ties) together with the BIC of each candidate."""
    X = np.asarray(features, dtype=float)
    ks = sorted(set(k_range))
    if not ks:
        raise ValueError("k_range is empty")
    if ks[-1] > X.shape[0]:
        raise ValueError(f"k_range max {ks[-1]} exceeds sample count {X.shape[0]}")
    scores = {k: fit_gmm(X, k, seed, **fit_kwargs).bic(X.shape[0]) for k in ks}
    best = min(ks, key=lambda k: (scores[k], k))
    return best, scores


@dataclass
class ClusterAssignment:
    commands: list[str]
    labels: list[int]
    k: int

    def __post_init__(self):
        if len(self.commands) != len(self.labels):
            raise ValueError("commands and labels differ in length")
        self._lookup = dict(zip(self.commands, self.labels))

    def cluster_of(self, command: str) -> int:
        return self._lookup[command]

    def __contains__(self, command: str) -> bool:
        return command in self._lookup

    def members(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for c, lab in zip(self.commands, self.labels):
            out.setdefault(lab, []).append(c)
        return out


def assign(model: GmmModel, features: np.ndarray, commands: Sequence[str] | None = None) -> ClusterAssignment:
    """Hard labels by argmax responsibility; np.argmax takes the lowest
    component index on exact ties."""
    X = np.asarray(features, dtype=float)
    resp = model.responsibilities(X)
    labels = [int(i) for i in np.argmax(resp, axis=1)]
    if commands is None:
        commands = [str(i) for i in range(X.shape[0])]
    if len(commands) != X.shape[0]:
        raise ValueError("one command per feature row required")
    return ClusterAssignment(list(commands), labels, model.k)
