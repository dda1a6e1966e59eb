"""Miniature version of the hypervolume-versus-cost benchmark study.

Three trials per algorithm at reduced budgets, aggregated into mean
convergence curves, cost-to-threshold statistics, and the cost-reduction
factor of the multi-fidelity loops over the single-fidelity baseline.
The full desk-scale study (ten trials, full budgets) runs via the CLI:

    momf bench --config study.json --jobs 4
"""

import numpy as np

from momf import bench, engine
from momf.problems import get_problem, oracle_front

problem = get_problem("branin-currin")
oracle = oracle_front(problem, 10_000, seed=0)

SETTINGS = {
    "momf1": dict(total_budget=800.0, init_count=5, max_iterations=60),
    "momf2": dict(total_budget=800.0, init_count=5, max_iterations=60),
    "sf-ehvi": dict(total_budget=2500.0, init_count=1, max_iterations=None),
}

traces: dict[str, list[bench.HvTrace]] = {}
fidelities: dict[str, list[np.ndarray]] = {}
for algorithm, setting in SETTINGS.items():
    for trial in range(3):
        config = engine.LoopConfig(
            algorithm=algorithm,
            seed=trial,
            candidate_pool=512,
            restarts=6,
            **setting,
        )
        record = engine.run(problem, config)
        traces.setdefault(algorithm, []).append(
            bench.hv_trace(record, problem, oracle, test_points=5000, seed=0)
        )
        fidelities.setdefault(algorithm, []).append(
            np.array([o.s for o in record.dataset.observations if o.iteration >= 1])
        )
        print(f"{algorithm} trial {trial}: cost {record.dataset.cumulative_cost:7.1f}, "
              f"final HV fraction {traces[algorithm][-1].fractions[-1]:.3f}")

report = bench.aggregate(traces, threshold=0.9, fidelities=fidelities)
print(f"\nthreshold: {report.threshold:.0%} of the oracle hypervolume")
for algorithm in SETTINGS:
    cost = report.mean_cost_to_threshold[algorithm]
    factor = report.reduction_factors[algorithm]
    print(
        f"{algorithm:8s} mean cost to threshold: "
        f"{'not reached' if cost is None else format(cost, '8.1f')}   "
        f"cost-reduction factor: {'n/a' if factor is None else format(factor, '.2f')}   "
        f"mean fidelity: {report.fidelity_mean[algorithm]:.3f}"
    )
