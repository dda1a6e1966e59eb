"""Acquisition functions: EI, UCB, max-value entropy search, its
cost-aware multi-fidelity variant, expected hypervolume improvement
(Monte-Carlo and exact), and the cost-penalized hypervolume score used for
joint input-fidelity selection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri
from scipy.stats import norm, qmc

from . import gp
from .gp import GpModel, Posterior
from .pareto import ParetoFront, hvi, nondominated_cells

__all__ = [
    "McSampleSet",
    "CostModel",
    "FidelityObjective",
    "expected_improvement",
    "ucb",
    "sample_max_values",
    "mes",
    "mf_mes",
    "ehvi_mc",
    "ehvi_exact_2d",
    "ehvi_cells_mc",
    "momf_score",
    "fidelity_value",
]


@dataclass(frozen=True)
class McSampleSet:
    """Standard-normal base draws, fixed for the lifetime of one iteration."""

    seed: int
    base: np.ndarray  # (n_samples, dim)

    def __post_init__(self):
        self.base.setflags(write=False)

    @classmethod
    def create(cls, n_samples: int, dim: int, seed: int) -> "McSampleSet":
        """Scrambled-Sobol standard-normal draws (low-discrepancy, seeded)."""
        if n_samples < 1:
            raise ValueError("need at least one Monte-Carlo sample")
        sobol = qmc.Sobol(d=dim, scramble=True, seed=seed)
        if n_samples & (n_samples - 1) == 0:
            u = sobol.random_base2(int(math.log2(n_samples)))
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                u = sobol.random(n_samples)
        eps = np.finfo(float).tiny
        return cls(seed, ndtri(np.clip(u, eps, 1 - eps)))


@dataclass(frozen=True)
class CostModel:
    """Exponential evaluation cost ``fixed_cost + exp(coefficient * s)``."""

    coefficient: float
    fixed_cost: float = 0.0

    def __post_init__(self):
        if self.fixed_cost < 0:
            raise ValueError("fixed_cost must be non-negative")

    def __call__(self, s):
        return self.fixed_cost + np.exp(self.coefficient * np.asarray(s, dtype=float))


@dataclass(frozen=True)
class FidelityObjective:
    """Monotone reward for evaluating at higher fidelity."""

    kind: str = "linear"

    def __post_init__(self):
        if self.kind not in ("linear", "tanh"):
            raise ValueError(f"unknown fidelity objective kind: {self.kind!r}")

    def value(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0) or np.any(s > 1):
            raise ValueError("fidelity must lie in [0, 1]")
        return np.tanh(s) if self.kind == "tanh" else s + 0.0


def fidelity_value(fid_obj: FidelityObjective, s: float) -> float:
    return float(fid_obj.value(s))


def expected_improvement(p: Posterior, best: float) -> float:
    """Closed-form EI of a Gaussian over the incumbent ``best``."""
    sigma = math.sqrt(max(p.variance, 0.0))
    if sigma == 0.0:
        return max(p.mean - best, 0.0)
    z = (p.mean - best) / sigma
    return max(float((p.mean - best) * ndtr(z) + sigma * norm.pdf(z)), 0.0)


def ucb(p: Posterior, kappa: float) -> float:
    """Optimistic bound mu + kappa * sigma (maximization convention)."""
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    return float(p.mean + kappa * math.sqrt(max(p.variance, 0.0)))


# ---------------------------------------------------------------------------
# Max-value entropy search
# ---------------------------------------------------------------------------

def sample_max_values(
    models: list[GpModel],
    weights,
    n_samples: int,
    seed: int,
    grid_size: int = 1000,
) -> np.ndarray:
    """Approximate draws of the maximum of the weighted objective sum at
    target fidelity, via a Gumbel fit to the product of posterior CDFs on a
    random input grid."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    weights = np.asarray(weights, dtype=float)
    dim = models[0].input_dim - 1
    rng = np.random.default_rng(seed)
    grid = np.column_stack([rng.uniform(size=(grid_size, dim)), np.ones(grid_size)])
    mu = np.zeros(grid_size)
    var = np.zeros(grid_size)
    for w, model in zip(weights, models):
        m, v = gp.posterior_batch(model, grid)
        mu += w * m
        var += w * w * v
    sigma = np.sqrt(np.clip(var, 1e-24, None))

    def cdf_max(y: float) -> float:
        return float(np.exp(np.sum(log_ndtr((y - mu) / sigma))))

    span = 6.0 * float(sigma.max())
    lo_bracket = float(mu.max()) - span - 1e-9
    hi_bracket = float(mu.max()) + span + 1e-9
    quantiles = []
    for q in (0.25, 0.5, 0.75):
        lo, hi = lo_bracket, hi_bracket
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if cdf_max(mid) < q:
                lo = mid
            else:
                hi = mid
        quantiles.append(0.5 * (lo + hi))
    m25, m50, m75 = quantiles
    b = (m75 - m25) / (math.log(math.log(4.0)) - math.log(math.log(4.0 / 3.0)))
    a = m50 + b * math.log(math.log(2.0))
    u = rng.uniform(size=n_samples)
    return a - b * np.log(-np.log(u))


def mes(p: Posterior, max_samples) -> float:
    """Information gain about the maximum from one Gaussian observation."""
    ms = np.asarray(max_samples, dtype=float)
    if ms.size == 0:
        raise ValueError("max_samples must be non-empty")
    sigma = math.sqrt(max(p.variance, 0.0))
    sigma = max(sigma, 1e-6)
    gamma = (ms - p.mean) / sigma
    log_cdf = log_ndtr(gamma)
    ratio = np.exp(norm.logpdf(gamma) - log_cdf)
    return max(float(np.mean(0.5 * gamma * ratio - log_cdf)), 0.0)


def mf_mes(
    models: list[GpModel],
    x,
    s: float,
    cost_model: CostModel,
    max_samples,
    weights=None,
) -> float:
    """MES gain at (x, s) about the target-fidelity maximum per unit cost.

    The gain at fidelity s is attenuated by the squared posterior
    correlation between the scalarized objective at (x, s) and at (x, 1).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if not 0.0 <= s <= 1.0:
        raise ValueError("fidelity must lie in [0, 1]")
    if weights is None:
        weights = np.ones(len(models))
    weights = np.asarray(weights, dtype=float)
    q = np.concatenate([x, [s]])
    q1 = np.concatenate([x, [1.0]])
    mu = var = var1 = cov = 0.0
    for w, model in zip(weights, models):
        p = gp.posterior(model, q)
        p1 = gp.posterior(model, q1)
        mu += w * p.mean
        var += w * w * p.variance
        var1 += w * w * p1.variance
        cov += w * w * gp.posterior_cov(model, q, q1)
    denom = var * var1
    rho2 = 0.0 if denom <= 1e-24 else min(max(cov * cov / denom, 0.0), 1.0)
    cost = float(cost_model(s))
    if cost <= 0:
        raise FloatingPointError("cost model returned a non-positive cost")
    return mes(Posterior(mu, var), max_samples) * rho2 / cost


# ---------------------------------------------------------------------------
# Expected hypervolume improvement
# ---------------------------------------------------------------------------

def ehvi_mc(posteriors: list[Posterior], front: ParetoFront, samples: McSampleSet) -> float:
    """Monte-Carlo EHVI under independent per-objective Gaussians."""
    if len(posteriors) != front.dim:
        raise ValueError("one posterior per front objective is required")
    if samples.base.shape[0] == 0 or samples.base.shape[1] != front.dim:
        raise ValueError("sample set shape does not match the front dimension")
    mu = np.array([p.mean for p in posteriors])
    sigma = np.sqrt(np.clip([p.variance for p in posteriors], 0.0, None))
    total = 0.0
    for z in samples.base:
        total += hvi(front, mu + sigma * z)
    return total / samples.base.shape[0]


def ehvi_cells_mc(means, sigmas, cell_lower, cell_upper, base) -> np.ndarray:
    """Batched Monte-Carlo EHVI over a precomputed box decomposition.

    Same estimator as :func:`ehvi_mc` (identical base samples give identical
    values) but vectorized over candidates; this is the engine's hot path.
    """
    means = np.atleast_2d(np.asarray(means, dtype=float))
    sigmas = np.atleast_2d(np.asarray(sigmas, dtype=float))
    y = means[:, None, :] + sigmas[:, None, :] * base[None, :, :]  # (B, m, k)
    acc = np.zeros(y.shape[:2])
    for lo, up in zip(cell_lower, cell_upper):
        vol = np.clip(np.minimum(y[:, :, 0], up[0]) - lo[0], 0.0, None)
        for i in range(1, y.shape[2]):
            vol *= np.clip(np.minimum(y[:, :, i], up[i]) - lo[i], 0.0, None)
        acc += vol
    return acc.mean(axis=1)


def _partial_expectation(mu: float, sigma: float, lo: float, up: float) -> float:
    """E[(min(Y, up) - lo)+] for Y ~ N(mu, sigma^2)."""
    if sigma == 0.0:
        return max(min(mu, up) - lo, 0.0)
    alpha = (lo - mu) / sigma
    if not np.isfinite(up):
        return (mu - lo) * ndtr(-alpha) + sigma * norm.pdf(alpha)
    beta = (up - mu) / sigma
    return (
        (mu - lo) * (ndtr(beta) - ndtr(alpha))
        + sigma * (norm.pdf(alpha) - norm.pdf(beta))
        + (up - lo) * ndtr(-beta)
    )


def ehvi_exact_2d(posteriors: list[Posterior], front: ParetoFront) -> float:
    """Exact EHVI for two independent Gaussian objectives.

    Decomposes the nondominated region into cells and sums products of
    per-coordinate Gaussian partial expectations; serves as the oracle for
    the Monte-Carlo estimator.
    """
    if front.dim != 2 or len(posteriors) != 2:
        raise ValueError("exact formula is for the two-objective case")
    lower, upper = nondominated_cells(front)
    total = 0.0
    for lo, up in zip(lower, upper):
        term = 1.0
        for i, p in enumerate(posteriors):
            sigma = math.sqrt(max(p.variance, 0.0))
            term *= _partial_expectation(p.mean, sigma, lo[i], up[i])
        total += term
    return total


def momf_score(
    models: list[GpModel],
    x,
    s: float,
    front_augmented: ParetoFront,
    fid_obj: FidelityObjective,
    cost_model: CostModel,
    samples: McSampleSet,
) -> float:
    """Cost-penalized EHVI over the objectives augmented with the fidelity
    objective; the augmented coordinate is deterministic at fid_obj(s)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    q = np.concatenate([x, [s]])
    posteriors = [gp.posterior(model, q) for model in models]
    posteriors.append(Posterior(fidelity_value(fid_obj, s), 0.0))
    return ehvi_mc(posteriors, front_augmented, samples) / float(cost_model(s))
