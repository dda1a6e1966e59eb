"""Dominance, hypervolume, and hypervolume improvement on a toy front.

Walks through the quantities the optimizer maximizes: which points make a
Pareto front, how much objective space the front dominates, and how much a
new candidate would add.
"""

import numpy as np

from momf.pareto import ParetoFront, hvi, hypervolume, nondominated

points = np.array(
    [
        [0.9, 0.2],
        [0.7, 0.5],
        [0.5, 0.55],  # dominated by (0.7, 0.5)? no: 0.55 > 0.5, it survives
        [0.4, 0.4],  # dominated by (0.7, 0.5)
        [0.2, 0.8],
    ]
)
front_points = nondominated(points)
print("input points:", points.tolist())
print("nondominated:", front_points.tolist())

front = ParetoFront(front_points, np.zeros(2))
print("hypervolume from the origin:", round(hypervolume(front), 4))

for candidate in ([0.8, 0.6], [0.3, 0.3], [1.0, 0.1]):
    print(f"HVI of {candidate}: {hvi(front, candidate):.4f}")

# the improvement of a dominated candidate is exactly zero
assert hvi(front, [0.3, 0.3]) == 0.0
