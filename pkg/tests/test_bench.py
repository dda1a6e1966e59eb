"""Trace construction and aggregation checks on synthetic and small real
trial records."""

import numpy as np
import pytest

from momf import engine
from momf.bench import HvTrace, aggregate, fidelity_stats, hv_trace
from momf.engine import Dataset, IterationInfo, LoopConfig, Observation, TrialRecord
from momf.problems import get_problem, oracle_front

BC = get_problem("branin-currin")


def synthetic_trial(points, problem=BC, fidelities=None, start_cost=1.0):
    """Build a trial whose post-init observations visit ``points`` at the
    target fidelity (unless overridden), one iteration each."""
    data = Dataset()
    infos = []
    cumulative = 0.0
    for i, x in enumerate(points):
        s = 1.0 if fidelities is None else float(fidelities[i])
        y_raw = problem.evaluate(np.asarray(x), s)
        cost = start_cost + 0.5 * i
        cumulative += cost
        iteration = i + 1
        data.append(
            Observation(np.asarray(x, dtype=float), s, y_raw, problem.normalize(y_raw), cost, cumulative, iteration)
        )
        infos.append(IterationInfo(iteration, np.asarray(x, float), s, 0.0, cost, cumulative, None))
    config = LoopConfig(algorithm="sf-ehvi", total_budget=cumulative + 1)
    return TrialRecord(problem.name, config, data, infos)


class TestHvTrace:
    def test_oracle_members_recover_oracle_hypervolume(self):
        oracle = oracle_front(BC, 2000, seed=0)
        rng = np.random.default_rng(0)
        xs = rng.uniform(size=(2000, 2))
        y = BC.normalize(BC.evaluate_many(xs, np.ones(2000)))
        # pick the inputs realizing the oracle's nondominated subset
        idx = [int(np.argmin(np.sum((y - p) ** 2, axis=1))) for p in oracle.front.points]
        trial = synthetic_trial(xs[idx])
        trace = hv_trace(trial, BC, oracle, test_points=2000, seed=1)
        assert trace.fractions[-1] >= 0.95

    def test_first_three_iterations_untraced(self):
        rng = np.random.default_rng(1)
        trial = synthetic_trial(rng.uniform(size=(6, 2)))
        trace = hv_trace(trial, BC, oracle_front(BC, 2000, seed=0), test_points=500, seed=0)
        assert len(trace.costs) == 3  # iterations 4, 5, 6
        assert trace.costs[0] == trial.dataset.observations[3].cumulative_cost

    def test_fractions_bounded(self):
        rng = np.random.default_rng(2)
        trial = synthetic_trial(rng.uniform(size=(8, 2)))
        trace = hv_trace(trial, BC, oracle_front(BC, 2000, seed=0), test_points=500, seed=0)
        assert np.all(trace.fractions >= 0.0)
        assert np.all(trace.fractions <= 1.05)

    def test_empty_trial_rejected(self):
        record = TrialRecord("branin-currin", LoopConfig(algorithm="momf1", total_budget=1.0), Dataset(), [])
        with pytest.raises(ValueError):
            hv_trace(record, BC, oracle_front(BC, 2000, seed=0), test_points=100, seed=0)

    def test_reuses_persisted_hyperparameters(self):
        # a real (tiny) run records parameters; the trace must not refit
        cfg = LoopConfig(algorithm="momf1", total_budget=40.0, init_count=3, seed=0,
                         candidate_pool=64, restarts=2)
        record = engine.run(BC, cfg)
        oracle = oracle_front(BC, 2000, seed=0)
        a = hv_trace(record, BC, oracle, test_points=400, seed=3)
        b = hv_trace(record, BC, oracle, test_points=400, seed=3)
        assert np.array_equal(a.fractions, b.fractions)


class TestAggregate:
    def test_worked_arithmetic_example(self):
        # per-trial crossings at 700 and 900 average to 800; baseline at
        # 9600 gives a reduction factor of 12
        momf = [
            HvTrace(np.array([500.0, 700.0]), np.array([0.5, 0.92])),
            HvTrace(np.array([600.0, 900.0]), np.array([0.6, 0.95])),
        ]
        base = [HvTrace(np.array([9000.0, 9600.0]), np.array([0.7, 0.90]))]
        report = aggregate({"momf1": momf, "sf-ehvi": base}, threshold=0.9)
        assert report.mean_cost_to_threshold["momf1"] == pytest.approx(800.0)
        assert report.reduction_factors["momf1"] == pytest.approx(12.0)
        assert report.reduction_factors["sf-ehvi"] == 1.0

    def test_tiny_threshold_hits_first_point(self):
        trace = HvTrace(np.array([10.0, 20.0]), np.array([0.05, 0.5]))
        report = aggregate({"sf-ehvi": [trace]}, threshold=1e-9)
        assert report.mean_cost_to_threshold["sf-ehvi"] == pytest.approx(10.0)

    def test_threshold_bounds(self):
        trace = HvTrace(np.array([10.0]), np.array([0.5]))
        with pytest.raises(ValueError):
            aggregate({"sf-ehvi": [trace]}, threshold=0.0)
        with pytest.raises(ValueError):
            aggregate({"sf-ehvi": [trace]}, threshold=1.0)

    def test_not_reached_reported_as_none(self):
        never = [HvTrace(np.array([100.0, 200.0]), np.array([0.2, 0.4]))]
        base = [HvTrace(np.array([50.0, 500.0]), np.array([0.5, 0.95]))]
        report = aggregate({"momf1": never, "sf-ehvi": base}, threshold=0.9)
        assert report.cost_to_threshold["momf1"] == [None]
        assert report.mean_cost_to_threshold["momf1"] is None
        assert report.reduction_factors["momf1"] is None

    def test_permutation_invariance(self):
        rng = np.random.default_rng(3)
        traces = []
        for _ in range(4):
            costs = np.sort(rng.uniform(1, 100, size=5))
            fracs = np.sort(rng.uniform(0, 1, size=5))
            traces.append(HvTrace(costs, fracs))
        base = [HvTrace(np.array([50.0, 500.0]), np.array([0.5, 0.95]))]
        r1 = aggregate({"momf1": traces, "sf-ehvi": base}, threshold=0.5)
        r2 = aggregate({"momf1": traces[::-1], "sf-ehvi": base}, threshold=0.5)
        assert np.allclose(r1.mean_traces["momf1"], r2.mean_traces["momf1"], rtol=1e-12)
        assert r1.mean_cost_to_threshold["momf1"] == pytest.approx(
            r2.mean_cost_to_threshold["momf1"], rel=1e-12
        )

    def test_mean_trace_is_locf(self):
        trace = HvTrace(np.array([10.0, 100.0]), np.array([0.3, 0.8]))
        report = aggregate({"sf-ehvi": [trace]}, threshold=0.5, grid_points=16)
        grid = report.cost_grid
        vals = report.mean_traces["sf-ehvi"]
        assert vals[0] == pytest.approx(0.3)  # at the first trace cost
        assert vals[-1] == pytest.approx(0.8)
        between = (grid >= 10.0) & (grid < 100.0)
        assert np.all(vals[between] == pytest.approx(0.3))

    def test_fidelity_summary(self):
        trace = HvTrace(np.array([10.0]), np.array([0.95]))
        fids = {"momf1": [np.array([0.1, 0.2]), np.array([0.3, 0.4])]}
        report = aggregate({"momf1": [trace]}, threshold=0.9, baseline="momf1", fidelities=fids)
        assert report.fidelity_mean["momf1"] == pytest.approx(0.25)
        assert report.fidelity_hist["momf1"].sum() == 4


class TestFidelityStats:
    def test_single_fidelity_trial(self):
        rng = np.random.default_rng(4)
        trial = synthetic_trial(rng.uniform(size=(10, 2)))  # all s = 1
        stats = fidelity_stats(trial, bins=10)
        assert stats.mean == 1.0
        assert stats.counts[-1] == 10 and stats.counts[:-1].sum() == 0

    def test_uniform_sequence(self):
        rng = np.random.default_rng(5)
        n = 10_000
        fids = rng.uniform(size=n)
        trial = synthetic_trial(rng.uniform(size=(n, 2)), fidelities=fids)
        stats = fidelity_stats(trial, bins=10)
        assert stats.mean == pytest.approx(0.5, abs=0.05)
        assert stats.counts.sum() == n

    def test_excludes_initialization(self):
        data = Dataset()
        data.append(Observation(np.array([0.5, 0.5]), 0.3, np.zeros(2), np.zeros(2), 1.0, 1.0, 0))
        data.append(Observation(np.array([0.4, 0.4]), 1.0, np.zeros(2), np.zeros(2), 1.0, 2.0, 1))
        trial = TrialRecord("branin-currin", LoopConfig(algorithm="momf1", total_budget=5.0), data, [])
        stats = fidelity_stats(trial, bins=5)
        assert stats.mean == 1.0

    def test_too_few_bins_rejected(self):
        trial = synthetic_trial(np.random.default_rng(6).uniform(size=(4, 2)))
        with pytest.raises(ValueError):
            fidelity_stats(trial, bins=1)
