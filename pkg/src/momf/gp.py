"""Gaussian-process regression over the joint input-fidelity box.

One independent model per objective, each over the (d+1)-dimensional space
of search coordinates plus the fidelity coordinate. Targets are standardized
internally during fitting; predictions are returned on the original scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.optimize import minimize
from scipy.spatial.distance import cdist

__all__ = [
    "KernelParams",
    "GpModel",
    "Posterior",
    "FitConfig",
    "matern52",
    "build_model",
    "fit",
    "posterior",
    "posterior_batch",
    "posterior_cov",
    "log_marginal_likelihood",
]

JITTER = 1e-6
JITTER_RETRY = 1e-4
_SQRT5 = math.sqrt(5.0)


@dataclass(frozen=True)
class KernelParams:
    """Matern 5/2 hyperparameters; one lengthscale per input dimension."""

    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: float

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        if np.any(ls <= 0):
            raise ValueError("lengthscales must be positive")
        if self.signal_variance <= 0:
            raise ValueError("signal_variance must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")
        object.__setattr__(self, "lengthscales", ls)
        self.lengthscales.setflags(write=False)


@dataclass(frozen=True)
class Posterior:
    mean: float
    variance: float


def matern52(a, b, params: KernelParams) -> float:
    """Matern 5/2 covariance between two points."""
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.shape != b.shape or a.shape != params.lengthscales.shape:
        raise ValueError("point dimensions must match the lengthscales")
    r = math.sqrt(float(np.sum(((a - b) / params.lengthscales) ** 2)))
    return params.signal_variance * (1.0 + _SQRT5 * r + 5.0 * r * r / 3.0) * math.exp(-_SQRT5 * r)


def _kernel_matrix(xa: np.ndarray, xb: np.ndarray, params: KernelParams) -> np.ndarray:
    r = cdist(xa / params.lengthscales, xb / params.lengthscales)
    return params.signal_variance * (1.0 + _SQRT5 * r + 5.0 / 3.0 * r**2) * np.exp(-_SQRT5 * r)


@dataclass(frozen=True)
class GpModel:
    """Immutable fitted GP: training data, hyperparameters, cached Cholesky
    factor of K + (noise + jitter) I, and alpha = (K + ...)^-1 y.

    ``y_shift``/``y_scale`` map the internal (standardized) targets back to
    the original output scale.
    """

    train_x: np.ndarray
    train_y: np.ndarray
    params: KernelParams
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float
    y_shift: float = 0.0
    y_scale: float = 1.0

    @property
    def input_dim(self) -> int:
        return self.train_x.shape[1]


def build_model(
    train_x,
    train_y,
    params: KernelParams,
    jitter: float = JITTER,
    y_shift: float = 0.0,
    y_scale: float = 1.0,
) -> GpModel:
    """Factorize the regularized kernel matrix and cache the solve.

    ``train_y`` is taken as-is (internal scale); use :func:`fit` to go from
    raw data to a model with standardization handled.
    """
    x = np.atleast_2d(np.asarray(train_x, dtype=float))
    y = np.asarray(train_y, dtype=float).reshape(-1)
    if len(x) != len(y) or len(x) == 0:
        raise ValueError("training inputs and targets must be non-empty and aligned")
    if not np.all(np.isfinite(y)):
        raise ValueError("training targets must be finite")
    k = _kernel_matrix(x, x, params)
    for jit in (jitter, JITTER_RETRY):
        try:
            chol = linalg.cholesky(
                k + (params.noise_variance + jit) * np.eye(len(x)), lower=True
            )
        except linalg.LinAlgError:
            continue
        alpha = linalg.cho_solve((chol, True), y)
        return GpModel(x, y, params, chol, alpha, jit, y_shift, y_scale)
    raise linalg.LinAlgError("kernel matrix is not positive definite even with retry jitter")


def posterior(model: GpModel, query) -> Posterior:
    """Predictive mean and (non-negative) variance at one point."""
    q = np.asarray(query, dtype=float).reshape(1, -1)
    if q.shape[1] != model.input_dim:
        raise ValueError("query dimension differs from model input dimension")
    mean, var = posterior_batch(model, q)
    return Posterior(float(mean[0]), float(var[0]))


def posterior_batch(model: GpModel, queries) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized predictive means and variances at many points."""
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    if q.shape[1] != model.input_dim:
        raise ValueError("query dimension differs from model input dimension")
    kstar = _kernel_matrix(q, model.train_x, model.params)
    mean = kstar @ model.alpha
    v = linalg.solve_triangular(model.chol, kstar.T, lower=True)
    var = model.params.signal_variance - np.sum(v * v, axis=0)
    var = np.clip(var, 0.0, None)
    return model.y_shift + model.y_scale * mean, model.y_scale**2 * var


def posterior_mean_batch(model: GpModel, queries) -> np.ndarray:
    """Predictive means only; skips the variance solve."""
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    if q.shape[1] != model.input_dim:
        raise ValueError("query dimension differs from model input dimension")
    kstar = _kernel_matrix(q, model.train_x, model.params)
    return model.y_shift + model.y_scale * (kstar @ model.alpha)


def posterior_cov(model: GpModel, q1, q2) -> float:
    """Predictive covariance between two query points."""
    q1 = np.asarray(q1, dtype=float).reshape(1, -1)
    q2 = np.asarray(q2, dtype=float).reshape(1, -1)
    k1 = _kernel_matrix(q1, model.train_x, model.params)
    k2 = _kernel_matrix(q2, model.train_x, model.params)
    v1 = linalg.solve_triangular(model.chol, k1.T, lower=True)
    v2 = linalg.solve_triangular(model.chol, k2.T, lower=True)
    prior = matern52(q1[0], q2[0], model.params)
    return model.y_scale**2 * (prior - float(v1[:, 0] @ v2[:, 0]))


def posterior_cov_batch(model: GpModel, queries, ref_query) -> np.ndarray:
    """Predictive covariance of each row of ``queries`` with ``ref_query``."""
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    ref = np.asarray(ref_query, dtype=float).reshape(1, -1)
    kq = _kernel_matrix(q, model.train_x, model.params)
    kr = _kernel_matrix(ref, model.train_x, model.params)
    vq = linalg.solve_triangular(model.chol, kq.T, lower=True)
    vr = linalg.solve_triangular(model.chol, kr.T, lower=True)
    prior = _kernel_matrix(q, ref, model.params)[:, 0]
    return model.y_scale**2 * (prior - vq.T @ vr[:, 0])


def log_marginal_likelihood(model: GpModel) -> float:
    """Evidence of the internal targets under the model's hyperparameters."""
    diag = np.diag(model.chol)
    if np.any(diag <= 0) or not np.all(np.isfinite(diag)):
        raise FloatingPointError("factorization is singular")
    n = len(model.train_y)
    return float(
        -0.5 * model.train_y @ model.alpha - np.sum(np.log(diag)) - 0.5 * n * math.log(2 * math.pi)
    )


# ---------------------------------------------------------------------------
# Hyperparameter fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitConfig:
    """Multi-start simplex search settings for hyperparameter selection."""

    restarts: int = 8
    lengthscale_bounds: tuple[float, float] = (0.01, 10.0)
    signal_bounds: tuple[float, float] = (0.01, 100.0)
    noise_bounds: tuple[float, float] = (1e-8, 1e-2)
    max_evals: int = 100
    seed: int = 0


def fit(train_x, train_y, config: FitConfig = FitConfig()) -> GpModel:
    """Fit kernel hyperparameters by maximizing the log marginal likelihood.

    Targets are standardized to zero mean and unit variance before the
    search; the returned model un-standardizes its predictions. The search
    runs ``config.restarts`` Nelder-Mead simplex descents in log-space from
    one default and otherwise random starting points.
    """
    x = np.atleast_2d(np.asarray(train_x, dtype=float))
    y = np.asarray(train_y, dtype=float).reshape(-1)
    if len(x) == 0 or len(y) != len(x):
        raise ValueError("empty dataset or misaligned targets")
    if not np.all(np.isfinite(y)):
        raise ValueError("training targets must be finite")
    shift = float(np.mean(y))
    scale = float(np.std(y))
    if scale < 1e-12:
        scale = 1.0
    z = (y - shift) / scale
    dim = x.shape[1]

    lo = np.log([config.lengthscale_bounds[0]] * dim + [config.signal_bounds[0], config.noise_bounds[0]])
    hi = np.log([config.lengthscale_bounds[1]] * dim + [config.signal_bounds[1], config.noise_bounds[1]])
    bounds = list(zip(lo, hi))

    def neg_lml(theta: np.ndarray) -> float:
        theta = np.clip(theta, lo, hi)
        params = KernelParams(np.exp(theta[:dim]), float(np.exp(theta[dim])), float(np.exp(theta[dim + 1])))
        try:
            model = build_model(x, z, params)
        except linalg.LinAlgError:
            return 1e12
        val = log_marginal_likelihood(model)
        return -val if np.isfinite(val) else 1e12

    rng = np.random.default_rng(config.seed)
    starts = [np.log(np.concatenate((np.full(dim, 0.5), [1.0, 1e-4])))]
    while len(starts) < max(1, config.restarts):
        starts.append(rng.uniform(lo, hi))

    best_theta, best_val = None, np.inf
    for x0 in starts:
        res = minimize(
            neg_lml,
            np.clip(x0, lo, hi),
            method="Nelder-Mead",
            bounds=bounds,
            options={"maxfev": config.max_evals, "xatol": 1e-3, "fatol": 1e-7},
        )
        if res.fun < best_val:
            best_val, best_theta = res.fun, np.clip(res.x, lo, hi)

    params = KernelParams(
        np.exp(best_theta[:dim]),
        float(np.exp(best_theta[dim])),
        float(np.exp(best_theta[dim + 1])),
    )
    return build_model(x, z, params, y_shift=shift, y_scale=scale)


def rebuild(train_x, train_y, params: KernelParams, y_shift: float, y_scale: float) -> GpModel:
    """Reconstruct a fitted model from persisted hyperparameters."""
    y = np.asarray(train_y, dtype=float).reshape(-1)
    return build_model(train_x, (y - y_shift) / y_scale, params, y_shift=y_shift, y_scale=y_scale)
