"""Optimization loops: joint input-fidelity hypervolume-per-cost search,
the two-step variant (hypervolume step then fidelity step), and the
single-fidelity EHVI baseline, plus the shared acquisition maximizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import log_ndtr
from scipy.stats import norm

from . import gp
from .acquisition import FidelityObjective, McSampleSet, sample_max_values
from .acquisition import ehvi_cells_mc
from .gp import FitConfig, GpModel, KernelParams
from .pareto import ParetoFront, nondominated_cells
from .problems import Problem

__all__ = [
    "Observation",
    "Dataset",
    "LoopConfig",
    "IterationInfo",
    "TrialRecord",
    "initialize",
    "maximize_acquisition",
    "run_momf1",
    "run_momf2",
    "run_sf_ehvi",
    "run",
]

ALGORITHMS = ("momf1", "momf2", "sf-ehvi")

# named sub-streams so draws are independent of evaluation order
_INIT, _POOL, _MC, _FIT, _MAXVAL = range(5)


def _seed(master: int, stream: int, *extra: int) -> int:
    return int(np.random.SeedSequence((master, stream) + extra).generate_state(1)[0])


@dataclass(frozen=True)
class Observation:
    x: np.ndarray
    s: float
    y_raw: np.ndarray
    y_norm: np.ndarray
    cost: float
    cumulative_cost: float
    iteration: int


class Dataset:
    """Ordered evaluation log; the training corpus for all surrogates."""

    def __init__(self, observations: list[Observation] | None = None):
        self.observations: list[Observation] = []
        for obs in observations or []:
            self.append(obs)

    def append(self, obs: Observation):
        if self.observations and obs.cumulative_cost <= self.observations[-1].cumulative_cost:
            raise ValueError("cumulative cost must be strictly increasing")
        self.observations.append(obs)

    def __len__(self) -> int:
        return len(self.observations)

    @property
    def cumulative_cost(self) -> float:
        return self.observations[-1].cumulative_cost if self.observations else 0.0

    def inputs(self) -> np.ndarray:
        return np.array([o.x for o in self.observations])

    def fidelities(self) -> np.ndarray:
        return np.array([o.s for o in self.observations])

    def joint_inputs(self) -> np.ndarray:
        return np.column_stack([self.inputs(), self.fidelities()])

    def norm_targets(self) -> np.ndarray:
        return np.array([o.y_norm for o in self.observations])

    def raw_targets(self) -> np.ndarray:
        return np.array([o.y_raw for o in self.observations])

    def up_to(self, iteration: int) -> "Dataset":
        return Dataset([o for o in self.observations if o.iteration <= iteration])


@dataclass(frozen=True)
class LoopConfig:
    algorithm: str
    total_budget: float
    init_count: int = 5
    mc_samples: int = 128
    restarts: int = 10
    candidate_pool: int = 1024
    fid_obj: str = "linear"
    seed: int = 0
    max_iterations: int | None = None
    init_mode: str | None = None  # default: cost_aware for MOMF, fixed_high for sf-ehvi
    mes_samples: int = 10

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.total_budget <= 0:
            raise ValueError("total_budget must be positive")
        if self.init_count < 1:
            raise ValueError("init_count must be >= 1")


@dataclass(frozen=True)
class FittedParams:
    kernel: KernelParams
    y_shift: float
    y_scale: float


@dataclass(frozen=True)
class IterationInfo:
    index: int
    x: np.ndarray
    s: float
    acq_value: float
    cost: float
    cumulative_cost: float
    gp_params: tuple[FittedParams, ...]


@dataclass
class TrialRecord:
    problem_name: str
    config: LoopConfig
    dataset: Dataset
    iterations: list[IterationInfo] = field(default_factory=list)


def initialize(problem: Problem, n: int, mode: str, seed: int) -> Dataset:
    """Draw starting points: uniform inputs, with fidelities either from the
    cost-aware density p(s) ~ 1/C(s) or pinned to the target fidelity."""
    if n < 1:
        raise ValueError("need at least one initial point")
    if mode not in ("cost_aware", "fixed_high"):
        raise ValueError(f"unknown initialization mode {mode!r}")
    rng = np.random.default_rng(_seed(seed, _INIT))
    x = rng.uniform(size=(n, problem.input_dim))
    if mode == "fixed_high":
        s = np.ones(n)
    else:
        grid = np.linspace(0.0, 1.0, 1000)
        weights = 1.0 / problem.cost_model(grid)
        cdf = np.concatenate(([0.0], np.cumsum((weights[1:] + weights[:-1]) / 2 * np.diff(grid))))
        cdf /= cdf[-1]
        s = np.interp(rng.uniform(size=n), cdf, grid)
    data = Dataset()
    cumulative = 0.0
    for i in range(n):
        y_raw = problem.evaluate(x[i], float(s[i]))
        cost = float(problem.cost_model(s[i]))
        cumulative += cost
        data.append(
            Observation(x[i], float(s[i]), y_raw, problem.normalize(y_raw), cost, cumulative, 0)
        )
    return data


def maximize_acquisition(
    score: Callable[[np.ndarray], np.ndarray],
    bounds: np.ndarray,
    pool: int,
    restarts: int,
    seed: int,
) -> tuple[np.ndarray, float]:
    """Maximize a batched score over a box.

    Scores a uniform candidate pool, then refines the best ``restarts``
    candidates by coordinate-wise pattern descent with halving steps until
    the step is below 1e-3 (in box units). Deterministic under fixed seed.
    """
    bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
    dim = bounds.shape[0]
    lo, hi = bounds[:, 0], bounds[:, 1]
    if pool < restarts or restarts < 1:
        raise ValueError("need pool >= restarts >= 1")
    rng = np.random.default_rng(seed)
    cands = lo + rng.uniform(size=(pool, dim)) * (hi - lo)
    vals = np.asarray(score(cands), dtype=float)
    vals[~np.isfinite(vals)] = -np.inf
    if not np.any(np.isfinite(vals)):
        raise FloatingPointError("acquisition was non-finite on the whole candidate pool")
    order = np.argsort(-vals, kind="stable")[:restarts]
    pts = cands[order].copy()
    best = vals[order].copy()
    span = hi - lo
    steps = np.full(len(pts), 0.25)
    for _ in range(100):
        active = steps >= 1e-3
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        proposals = []
        for r in idx:
            for c in range(dim):
                for sign in (1.0, -1.0):
                    p = pts[r].copy()
                    p[c] = np.clip(p[c] + sign * steps[r] * span[c], lo[c], hi[c])
                    proposals.append(p)
        pvals = np.asarray(score(np.array(proposals)), dtype=float)
        pvals[~np.isfinite(pvals)] = -np.inf
        pvals = pvals.reshape(len(idx), 2 * dim)
        for row, r in enumerate(idx):
            j = int(np.argmax(pvals[row]))
            if pvals[row, j] > best[r] + 1e-12:
                best[r] = pvals[row, j]
                pts[r] = proposals[row * 2 * dim + j]
            else:
                steps[r] /= 2.0
    winner = int(np.argmax(best))
    return pts[winner], float(best[winner])


# ---------------------------------------------------------------------------
# Shared loop helpers
# ---------------------------------------------------------------------------

def _fit_models(data: Dataset, problem: Problem, seed: int, iteration: int) -> list[GpModel]:
    x = data.joint_inputs()
    targets = data.norm_targets()
    models = []
    for j in range(problem.objective_count):
        cfg = FitConfig(seed=_seed(seed, _FIT, iteration, j))
        try:
            models.append(gp.fit(x, targets[:, j], cfg))
        except Exception as exc:  # noqa: BLE001 - surface with trial context
            raise RuntimeError(
                f"GP fit failed for objective {j} at iteration {iteration}: {exc}"
            ) from exc
    return models


def _fitted_params(models: list[GpModel]) -> tuple[FittedParams, ...]:
    return tuple(FittedParams(m.params, m.y_shift, m.y_scale) for m in models)


def _posterior_grid(models: list[GpModel], queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    means = np.empty((len(queries), len(models)))
    variances = np.empty_like(means)
    for j, model in enumerate(models):
        means[:, j], variances[:, j] = gp.posterior_batch(model, queries)
    return means, variances


def _projected_front(models: list[GpModel], data: Dataset, k: int) -> ParetoFront:
    """Observed inputs projected to the target fidelity via posterior means."""
    queries = np.column_stack([data.inputs(), np.ones(len(data))])
    means, _ = _posterior_grid(models, queries)
    return ParetoFront.from_observations(means, np.zeros(k))


def _mes_batch(mu: np.ndarray, var: np.ndarray, max_values: np.ndarray) -> np.ndarray:
    sigma = np.sqrt(np.clip(var, 0.0, None))
    sigma = np.maximum(sigma, 1e-6)
    gamma = (max_values[None, :] - mu[:, None]) / sigma[:, None]
    log_cdf = log_ndtr(gamma)
    ratio = np.exp(norm.logpdf(gamma) - log_cdf)
    return np.clip(np.mean(0.5 * gamma * ratio - log_cdf, axis=1), 0.0, None)


def _budget_left(config: LoopConfig, data: Dataset, min_cost: float, iteration: int) -> bool:
    if config.max_iterations is not None and iteration > config.max_iterations:
        return False
    return data.cumulative_cost + min_cost <= config.total_budget


def _record(data, problem, x, s, acq, iteration, models) -> IterationInfo:
    y_raw = problem.evaluate(x, s)
    cost = float(problem.cost_model(s))
    cumulative = data.cumulative_cost + cost
    data.append(Observation(x, s, y_raw, problem.normalize(y_raw), cost, cumulative, iteration))
    return IterationInfo(iteration, x, s, acq, cost, cumulative, _fitted_params(models))


# ---------------------------------------------------------------------------
# Loops
# ---------------------------------------------------------------------------

def run_momf1(problem: Problem, config: LoopConfig) -> TrialRecord:
    """Joint (x, s) maximization of the fidelity-augmented EHVI per cost."""
    assert config.algorithm == "momf1"
    fid = FidelityObjective(config.fid_obj)
    cost_model = problem.cost_model
    k = problem.objective_count
    data = initialize(problem, config.init_count, config.init_mode or "cost_aware", config.seed)
    record = TrialRecord(problem.name, config, data)
    dim = problem.input_dim + 1
    bounds = np.repeat([[0.0, 1.0]], dim, axis=0)
    iteration = 0
    while True:
        iteration += 1
        if not _budget_left(config, data, float(cost_model(0.0)), iteration):
            break
        models = _fit_models(data, problem, config.seed, iteration)
        augmented = np.column_stack([data.norm_targets(), fid.value(data.fidelities())])
        front = ParetoFront.from_observations(augmented, np.zeros(k + 1))
        cell_lo, cell_up = nondominated_cells(front)
        base = McSampleSet.create(config.mc_samples, k + 1, _seed(config.seed, _MC, iteration)).base

        def score(cands: np.ndarray) -> np.ndarray:
            means, variances = _posterior_grid(models, cands)
            fid_col = fid.value(cands[:, -1])
            means = np.column_stack([means, fid_col])
            sigmas = np.column_stack([np.sqrt(variances), np.zeros(len(cands))])
            ehvi = ehvi_cells_mc(means, sigmas, cell_lo, cell_up, base)
            return ehvi / cost_model(cands[:, -1])

        candidate, acq = maximize_acquisition(
            score, bounds, config.candidate_pool, config.restarts, _seed(config.seed, _POOL, iteration)
        )
        x, s = candidate[:-1], float(candidate[-1])
        if data.cumulative_cost + float(cost_model(s)) > config.total_budget:
            break
        record.iterations.append(_record(data, problem, x, s, acq, iteration, models))
    return record


def run_momf2(
    problem: Problem,
    config: LoopConfig,
    fidelity_chooser: Callable[..., float] | None = None,
) -> TrialRecord:
    """Two-step loop: EHVI at the target fidelity picks the input, then the
    cost-weighted entropy score picks the fidelity at that input.

    ``fidelity_chooser`` overrides step two (used for degeneracy testing);
    it receives (models, x, iteration) and returns a fidelity.
    """
    assert config.algorithm == "momf2"
    cost_model = problem.cost_model
    k = problem.objective_count
    data = initialize(problem, config.init_count, config.init_mode or "cost_aware", config.seed)
    record = TrialRecord(problem.name, config, data)
    d = problem.input_dim
    bounds_x = np.repeat([[0.0, 1.0]], d, axis=0)
    weights = np.ones(k)
    iteration = 0
    while True:
        iteration += 1
        if not _budget_left(config, data, float(cost_model(0.0)), iteration):
            break
        models = _fit_models(data, problem, config.seed, iteration)
        front = _projected_front(models, data, k)
        cell_lo, cell_up = nondominated_cells(front)
        base = McSampleSet.create(config.mc_samples, k, _seed(config.seed, _MC, iteration)).base

        def score_x(cands: np.ndarray) -> np.ndarray:
            queries = np.column_stack([cands, np.ones(len(cands))])
            means, variances = _posterior_grid(models, queries)
            return ehvi_cells_mc(means, np.sqrt(variances), cell_lo, cell_up, base)

        x, acq = maximize_acquisition(
            score_x, bounds_x, config.candidate_pool, config.restarts, _seed(config.seed, _POOL, iteration)
        )

        if fidelity_chooser is not None:
            s = float(fidelity_chooser(models, x, iteration))
        else:
            max_values = sample_max_values(
                models, weights, config.mes_samples, _seed(config.seed, _MAXVAL, iteration)
            )
            q1 = np.concatenate([x, [1.0]])
            var1 = 0.0
            for w, model in zip(weights, models):
                var1 += w * w * gp.posterior(model, q1).variance

            def score_s(cands: np.ndarray) -> np.ndarray:
                queries = np.column_stack([np.tile(x, (len(cands), 1)), cands[:, 0]])
                mu = np.zeros(len(cands))
                var = np.zeros(len(cands))
                cov = np.zeros(len(cands))
                for w, model in zip(weights, models):
                    m, v = gp.posterior_batch(model, queries)
                    mu += w * m
                    var += w * w * v
                    cov += w * w * gp.posterior_cov_batch(model, queries, q1)
                denom = var * var1
                rho2 = np.where(denom > 1e-24, np.clip(cov**2 / np.where(denom > 0, denom, 1.0), 0.0, 1.0), 0.0)
                gain = _mes_batch(mu, var, max_values)
                return gain * rho2 / cost_model(cands[:, 0])

            s_point, _ = maximize_acquisition(
                score_s,
                np.array([[0.0, 1.0]]),
                max(64, config.restarts),
                min(4, config.restarts),
                _seed(config.seed, _POOL, iteration, 1),
            )
            s = float(s_point[0])
        if data.cumulative_cost + float(cost_model(s)) > config.total_budget:
            break
        record.iterations.append(_record(data, problem, x, s, acq, iteration, models))
    return record


def run_sf_ehvi(problem: Problem, config: LoopConfig) -> TrialRecord:
    """Single-fidelity EHVI baseline: every evaluation at the target fidelity."""
    assert config.algorithm == "sf-ehvi"
    cost_model = problem.cost_model
    k = problem.objective_count
    data = initialize(problem, config.init_count, config.init_mode or "fixed_high", config.seed)
    record = TrialRecord(problem.name, config, data)
    d = problem.input_dim
    bounds_x = np.repeat([[0.0, 1.0]], d, axis=0)
    iteration = 0
    while True:
        iteration += 1
        if not _budget_left(config, data, float(cost_model(1.0)), iteration):
            break
        models = _fit_models(data, problem, config.seed, iteration)
        front = _projected_front(models, data, k)
        cell_lo, cell_up = nondominated_cells(front)
        base = McSampleSet.create(config.mc_samples, k, _seed(config.seed, _MC, iteration)).base

        def score_x(cands: np.ndarray) -> np.ndarray:
            queries = np.column_stack([cands, np.ones(len(cands))])
            means, variances = _posterior_grid(models, queries)
            return ehvi_cells_mc(means, np.sqrt(variances), cell_lo, cell_up, base)

        x, acq = maximize_acquisition(
            score_x, bounds_x, config.candidate_pool, config.restarts, _seed(config.seed, _POOL, iteration)
        )
        record.iterations.append(_record(data, problem, x, 1.0, acq, iteration, models))
    return record


_RUNNERS = {"momf1": run_momf1, "momf2": run_momf2, "sf-ehvi": run_sf_ehvi}


def run(problem: Problem, config: LoopConfig) -> TrialRecord:
    """Dispatch to the loop named by ``config.algorithm``."""
    return _RUNNERS[config.algorithm](problem, config)
