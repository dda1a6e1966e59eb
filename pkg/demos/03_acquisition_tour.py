"""Tour of the acquisition functions on a shared one-dimensional posterior.

Prints EI, UCB, and MES along a grid, then compares Monte-Carlo EHVI with
the exact two-objective formula, and finally shows how the cost penalty
reshapes the fidelity-augmented score.
"""

import numpy as np

from momf import gp
from momf.acquisition import (
    CostModel,
    FidelityObjective,
    McSampleSet,
    ehvi_exact_2d,
    ehvi_mc,
    expected_improvement,
    mes,
    momf_score,
    sample_max_values,
    ucb,
)
from momf.gp import KernelParams, Posterior
from momf.pareto import ParetoFront

rng = np.random.default_rng(1)

# a small 1-D model with a fidelity column pinned at 1
x = np.column_stack([rng.uniform(size=6), np.ones(6)])
y = np.sin(5 * x[:, 0])
model = gp.build_model(x, y, KernelParams(np.array([0.3, 1.0]), 1.0, 1e-6))
best = float(y.max())
ystars = sample_max_values([model], [1.0], 10, seed=2)

print(" x      mu     sd      EI     UCB(2)   MES")
for xi in np.linspace(0, 1, 11):
    p = gp.posterior(model, [xi, 1.0])
    print(
        f"{xi:5.2f}  {p.mean:6.3f} {np.sqrt(p.variance):6.3f}"
        f"  {expected_improvement(p, best):6.4f}  {ucb(p, 2.0):6.3f}"
        f"  {mes(p, ystars):6.4f}"
    )

# EHVI: Monte-Carlo estimator vs the exact 2-D decomposition
front = ParetoFront(np.array([[0.8, 0.3], [0.5, 0.6], [0.2, 0.9]]), np.zeros(2))
posts = [Posterior(0.7, 0.04), Posterior(0.7, 0.09)]
exact = ehvi_exact_2d(posts, front)
for m in (64, 512, 4096):
    mc = ehvi_mc(posts, front, McSampleSet.create(m, 2, seed=0))
    print(f"EHVI with {m:5d} samples: {mc:.5f}  (exact {exact:.5f})")

# the fidelity-augmented, cost-penalized score of the joint optimizer
models = [model]
aug_front = ParetoFront(np.array([[0.8, 0.2], [0.4, 0.9]]), np.zeros(2))
fid = FidelityObjective("linear")
cost = CostModel(4.8)
samples = McSampleSet.create(128, 2, seed=3)
print("\n s    cost    score")
for s in (0.0, 0.25, 0.5, 0.75, 1.0):
    val = momf_score(models, np.array([0.35]), s, aug_front, fid, cost, samples)
    print(f"{s:4.2f}  {float(cost(s)):7.2f}  {val:.6f}")
