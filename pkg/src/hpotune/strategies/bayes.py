"""Gaussian-process Bayesian optimization with expected improvement.

The surrogate uses a squared-exponential kernel on standardized inputs with
centered scores. Kernel hyperparameters are picked from a small fixed grid by
log marginal likelihood; the signal variance is the sample variance of the
scores. Proposals maximize expected improvement over a batch of fresh random
candidates, which works the same for integer, continuous and categorical
dimensions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.special import erfc

from ..core import StrategyResult, TrialRecorder, as_budget
from ..errors import DimensionMismatch, TuneError
from ..rng import SeededRandomStream
from ..space import Categorical, ContinuousRange, SearchSpace, Values, decode, encode, sample_encoded

LENGTH_SCALES = (0.1, 0.3, 1.0, 3.0, 10.0)
NOISE_VARIANCES = (1e-6, 1e-4, 1e-2)
SIGNAL_FLOOR = 1e-8
INIT_POINTS = 10
N_CANDIDATES = 2048


@dataclass
class GPModel:
    X: np.ndarray          # standardized training inputs
    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: float
    alpha: np.ndarray
    chol: np.ndarray
    length_scale: float
    signal_var: float
    noise_var: float
    jitter: float = 0.0
    log_marginal_likelihood: float = float("nan")
    degenerate: bool = False

    @property
    def dim(self) -> int:
        return self.X.shape[1]


def _sq_dists(A, B):
    d = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.maximum(d, 0.0)


def _factor(K, noise_var):
    n = len(K)
    jitter = 0.0
    eye = np.eye(n)
    while True:
        try:
            return np.linalg.cholesky(K + (noise_var + jitter) * eye), jitter
        except np.linalg.LinAlgError:
            jitter = 1e-10 if jitter == 0.0 else jitter * 10.0
            if jitter > 1.0:
                raise


def gp_fit(X, y, *, length_scale: float | None = None, noise_var: float | None = None,
           signal_var: float | None = None) -> GPModel:
    """Fit the surrogate. Unspecified kernel settings are chosen as described in the module doc."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} inputs but {y.shape[0]} scores")
    if X.shape[0] < 2:
        raise TuneError("gp_fit needs at least two points")
    x_mean = X.mean(axis=0)
    x_scale = X.std(axis=0)
    x_scale[x_scale == 0] = 1.0
    Z = (X - x_mean) / x_scale
    y_mean = float(y.mean())
    yc = y - y_mean

    degenerate = False
    if signal_var is None:
        signal_var = float(np.var(y, ddof=1))
        if signal_var < SIGNAL_FLOOR:
            signal_var = SIGNAL_FLOOR
            degenerate = True
    D = _sq_dists(Z, Z)
    n = len(y)
    best = None
    for ell in (LENGTH_SCALES if length_scale is None else (length_scale,)):
        K = signal_var * np.exp(-0.5 * D / ell**2)
        for nv in (NOISE_VARIANCES if noise_var is None else (noise_var,)):
            L, jitter = _factor(K, nv)
            alpha = cho_solve((L, True), yc)
            lml = -0.5 * yc @ alpha - np.log(np.diag(L)).sum() - 0.5 * n * math.log(2 * math.pi)
            if best is None or lml > best[0]:
                best = (lml, ell, nv, L, alpha, jitter)
    lml, ell, nv, L, alpha, jitter = best
    return GPModel(Z, x_mean, x_scale, y_mean, alpha, L, ell, signal_var, nv, jitter, float(lml), degenerate)


def _cross_kernel(model: GPModel, x):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != model.dim:
        raise DimensionMismatch(f"expected inputs of dimension {model.dim}, got {x.shape[1]}")
    z = (x - model.x_mean) / model.x_scale
    return z, model.signal_var * np.exp(-0.5 * _sq_dists(z, model.X) / model.length_scale**2)


def gp_predict_many(model: GPModel, x) -> tuple[np.ndarray, np.ndarray]:
    _, Ks = _cross_kernel(model, x)
    mean = model.y_mean + Ks @ model.alpha
    v = solve_triangular(model.chol, Ks.T, lower=True)
    var = np.maximum(model.signal_var - (v * v).sum(axis=0), 0.0)
    return mean, var


def gp_predict(model: GPModel, x) -> tuple[float, float]:
    """Posterior mean and (latent, noise-free) variance at a single point."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("gp_predict takes one point; use gp_predict_many for batches")
    mean, var = gp_predict_many(model, x[None, :])
    return float(mean[0]), float(var[0])


def gp_mean_gradient(model: GPModel, x) -> np.ndarray:
    """Analytic gradient of the posterior mean with respect to the raw input."""
    z, Ks = _cross_kernel(model, np.asarray(x, dtype=float)[None, :])
    diff = z[0][None, :] - model.X                      # (n, d)
    dk_dz = -(Ks[0] * model.alpha)[:, None] * diff / model.length_scale**2
    return dk_dz.sum(axis=0) / model.x_scale


def norm_cdf(z):
    return 0.5 * erfc(-np.asarray(z, dtype=float) / math.sqrt(2.0))


def norm_pdf(z):
    z = np.asarray(z, dtype=float)
    with np.errstate(over="ignore"):
        return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def expected_improvement(mean, variance, best_so_far):
    """EI for maximization; zero where the variance is zero. Vectorized."""
    mean = np.asarray(mean, dtype=float)
    s = np.sqrt(np.maximum(np.asarray(variance, dtype=float), 0.0))
    gain = mean - best_so_far
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(s > 0, gain / np.where(s > 0, s, 1.0), 0.0)
        ei = gain * norm_cdf(z) + s * norm_pdf(z)
    ei = np.where(s > 0, np.maximum(ei, 0.0), 0.0)
    return float(ei) if ei.ndim == 0 else ei


def surrogate_features(space: SearchSpace, encoded) -> np.ndarray:
    """Map encoded vectors to GP inputs: one-hot for categorical dims, log for log-uniform."""
    V = np.atleast_2d(np.asarray(encoded, dtype=float))
    cols = []
    for j, (_, d) in enumerate(space.params):
        if isinstance(d, (Categorical, Values)):
            idx = np.clip(np.floor(V[:, j] + 0.5), 0, d.size - 1).astype(int)
            cols.append(np.eye(d.size)[idx])
        elif isinstance(d, ContinuousRange) and d.log:
            cols.append(np.log(V[:, j])[:, None])
        else:
            cols.append(V[:, j][:, None])
    return np.hstack(cols)


def bayes_optimize(space: SearchSpace, objective, budget, seed: int, *, init_points: int = INIT_POINTS,
                   n_candidates: int = N_CANDIDATES, sink=None) -> StrategyResult:
    """``init_points`` random trials, then one EI-maximizing proposal per remaining evaluation."""
    budget = as_budget(budget)
    if budget is None or budget.max_evaluations < init_points + 1:
        raise TuneError(f"bayes needs a budget of at least {init_points + 1}")
    stream = SeededRandomStream(seed).child("bayes")
    rec = TrialRecorder(objective, space, budget, sink=sink)
    for v in sample_encoded(space, stream.child("init"), init_points):
        rec.evaluate(decode(space, v))
    it = 0
    while not rec.exhausted:
        X = surrogate_features(space, np.array([encode(space, t.config) for t in rec.history]))
        y = np.array([t.score for t in rec.history])
        model = gp_fit(X, y)
        cand = sample_encoded(space, stream.child("candidates", it), n_candidates)
        mean, var = gp_predict_many(model, surrogate_features(space, cand))
        ei = expected_improvement(mean, var, float(y.max()))
        rec.evaluate(decode(space, cand[int(np.argmax(ei))]))
        it += 1
    return rec.result("bayes", seed)
