"""Hypervolume-versus-cost tracing, multi-trial aggregation, and
cost-reduction reporting for the benchmark study.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gp
from .engine import TrialRecord
from .pareto import ParetoFront, hypervolume
from .problems import OracleFront, Problem

__all__ = ["HvTrace", "BenchReport", "FidelityStats", "hv_trace", "aggregate", "fidelity_stats"]

TRACE_START_ITERATION = 4  # early-iteration fronts are huge and uninformative
HV_FRACTION_CAP = 1.05  # oracle front is itself sampled; small overshoot allowed


@dataclass(frozen=True)
class HvTrace:
    """Per-trial (cumulative cost, hypervolume fraction) curve."""

    costs: np.ndarray
    fractions: np.ndarray

    def __post_init__(self):
        costs = np.asarray(self.costs, dtype=float)
        fractions = np.asarray(self.fractions, dtype=float)
        if costs.shape != fractions.shape or costs.ndim != 1:
            raise ValueError("costs and fractions must be aligned 1-D arrays")
        if len(costs) > 1 and np.any(np.diff(costs) <= 0):
            raise ValueError("cumulative costs must be strictly increasing")
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "fractions", fractions)


def hv_trace(
    trial: TrialRecord,
    problem: Problem,
    oracle: OracleFront,
    test_points: int = 10_000,
    seed: int = 0,
) -> HvTrace:
    """GP-based hypervolume fraction after each iteration of a trial.

    For every iteration from the fourth on, surrogates conditioned on the
    observations so far predict the objectives at ``test_points`` random
    target-fidelity inputs; the hypervolume of the nondominated predictions
    is expressed as a fraction of the oracle hypervolume. Per-iteration
    hyperparameters persisted in the trial are reused rather than refitted.
    """
    if len(trial.dataset) == 0:
        raise ValueError("cannot trace an empty trial")
    rng = np.random.default_rng(seed)
    queries = np.column_stack(
        [rng.uniform(size=(test_points, problem.input_dim)), np.ones(test_points)]
    )
    k = problem.objective_count
    costs = []
    fractions = []
    for info in trial.iterations:
        if info.index < TRACE_START_ITERATION:
            continue
        data = trial.dataset.up_to(info.index)
        x = data.joint_inputs()
        targets = data.norm_targets()
        means = np.empty((test_points, k))
        for j in range(k):
            if info.gp_params is not None:
                fp = info.gp_params[j]
                model = gp.rebuild(x, targets[:, j], fp.kernel, fp.y_shift, fp.y_scale)
            else:
                model = gp.fit(x, targets[:, j], gp.FitConfig(seed=seed + info.index * k + j))
            means[:, j] = gp.posterior_mean_batch(model, queries)
        front = ParetoFront.from_observations(means, np.zeros(k))
        frac = hypervolume(front) / oracle.hypervolume
        costs.append(info.cumulative_cost)
        fractions.append(min(frac, HV_FRACTION_CAP))
    return HvTrace(np.asarray(costs), np.asarray(fractions))


@dataclass(frozen=True)
class FidelityStats:
    counts: np.ndarray
    edges: np.ndarray
    mean: float


def fidelity_stats(trial: TrialRecord, bins: int = 10) -> FidelityStats:
    """Histogram and mean of the fidelities selected after initialization."""
    if bins < 2:
        raise ValueError("need at least two bins")
    s = np.array([o.s for o in trial.dataset.observations if o.iteration >= 1])
    counts, edges = np.histogram(s, bins=bins, range=(0.0, 1.0))
    return FidelityStats(counts, edges, float(s.mean()) if len(s) else float("nan"))


@dataclass
class BenchReport:
    """Aggregated hypervolume-versus-cost statistics across algorithms."""

    threshold: float
    baseline: str
    cost_grid: np.ndarray
    mean_traces: dict[str, np.ndarray]
    cost_to_threshold: dict[str, list[float | None]]
    mean_cost_to_threshold: dict[str, float | None]
    mean_trace_cost_to_threshold: dict[str, float | None]
    reduction_factors: dict[str, float | None]
    fidelity_mean: dict[str, float] = field(default_factory=dict)
    fidelity_hist: dict[str, np.ndarray] = field(default_factory=dict)
    fidelity_edges: np.ndarray | None = None


def _step_interp(trace: HvTrace, grid: np.ndarray) -> np.ndarray:
    """Last-observation-carried-forward onto the grid; zero before the
    first trace point."""
    if len(trace.costs) == 0:
        return np.zeros_like(grid)
    idx = np.searchsorted(trace.costs, grid, side="right") - 1
    out = np.where(idx >= 0, trace.fractions[np.clip(idx, 0, None)], 0.0)
    return out


def _first_crossing(costs: np.ndarray, values: np.ndarray, threshold: float) -> float | None:
    hit = np.flatnonzero(values >= threshold)
    return float(costs[hit[0]]) if len(hit) else None


def aggregate(
    traces: dict[str, list[HvTrace]],
    threshold: float,
    baseline: str = "sf-ehvi",
    grid_points: int = 256,
    fidelities: dict[str, list[np.ndarray]] | None = None,
    bins: int = 10,
) -> BenchReport:
    """Combine per-trial traces into mean curves and cost-to-threshold
    statistics on a shared log-spaced cost grid.

    The cost-reduction factor of an algorithm is the baseline's mean
    per-trial cost to reach ``threshold`` divided by the algorithm's; trials
    that never reach the threshold are excluded from the means and factors
    are omitted when an algorithm never reaches it at all.
    """
    if not traces or any(len(v) == 0 for v in traces.values()):
        raise ValueError("need at least one trace per algorithm")
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    all_costs = np.concatenate([t.costs for ts in traces.values() for t in ts])
    if len(all_costs) == 0:
        raise ValueError("all traces are empty; nothing to aggregate")
    grid = np.geomspace(all_costs.min(), all_costs.max(), grid_points)
    mean_traces = {}
    ctt: dict[str, list[float | None]] = {}
    mean_ctt: dict[str, float | None] = {}
    grid_ctt: dict[str, float | None] = {}
    for alg, ts in traces.items():
        stack = np.vstack([_step_interp(t, grid) for t in ts])
        mean_traces[alg] = stack.mean(axis=0)
        ctt[alg] = [_first_crossing(t.costs, t.fractions, threshold) for t in ts]
        reached = [c for c in ctt[alg] if c is not None]
        mean_ctt[alg] = float(np.mean(reached)) if reached else None
        grid_ctt[alg] = _first_crossing(grid, mean_traces[alg], threshold)
    factors: dict[str, float | None] = {}
    base_cost = mean_ctt.get(baseline)
    for alg in traces:
        if alg == baseline:
            factors[alg] = 1.0 if base_cost is not None else None
        elif base_cost is None or mean_ctt[alg] is None:
            factors[alg] = None
        else:
            factors[alg] = base_cost / mean_ctt[alg]
    report = BenchReport(
        threshold=threshold,
        baseline=baseline,
        cost_grid=grid,
        mean_traces=mean_traces,
        cost_to_threshold=ctt,
        mean_cost_to_threshold=mean_ctt,
        mean_trace_cost_to_threshold=grid_ctt,
        reduction_factors=factors,
    )
    if fidelities:
        edges = np.linspace(0.0, 1.0, bins + 1)
        report.fidelity_edges = edges
        for alg, arrays in fidelities.items():
            pooled = np.concatenate(arrays) if arrays else np.empty(0)
            report.fidelity_hist[alg] = np.histogram(pooled, bins=edges)[0]
            report.fidelity_mean[alg] = float(pooled.mean()) if len(pooled) else float("nan")
    return report
