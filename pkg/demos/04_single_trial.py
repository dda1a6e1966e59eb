"""One optimization trial of each algorithm on Branin-Currin.

Runs short-budget versions of the joint single-step loop, the two-step
loop, and the single-fidelity baseline, then prints where each spent its
budget and what hypervolume it reached.
"""

from momf import bench, engine
from momf.problems import get_problem, oracle_front

problem = get_problem("branin-currin")
oracle = oracle_front(problem, 5000, seed=0)
print(f"oracle hypervolume ({len(oracle.front.points)} front points): {oracle.hypervolume:.4f}\n")

for algorithm, budget, init in (
    ("momf1", 400.0, 5),
    ("momf2", 400.0, 5),
    ("sf-ehvi", 1600.0, 1),
):
    config = engine.LoopConfig(
        algorithm=algorithm,
        total_budget=budget,
        init_count=init,
        seed=7,
        candidate_pool=512,
        restarts=6,
        max_iterations=40,
    )
    record = engine.run(problem, config)
    trace = bench.hv_trace(record, problem, oracle, test_points=4000, seed=0)
    s = record.dataset.fidelities()[init:]
    stats = bench.fidelity_stats(record, bins=5)
    print(f"{algorithm}:")
    print(f"  iterations        : {len(record.iterations)}")
    print(f"  total cost        : {record.dataset.cumulative_cost:.1f}")
    print(f"  mean fidelity     : {stats.mean:.3f}")
    print(f"  fidelity histogram: {stats.counts.tolist()}")
    if len(trace.costs):
        print(f"  final HV fraction : {trace.fractions[-1]:.3f}\n")
    else:
        print("  (too few iterations for a hypervolume trace)\n")
