"""Multi-fidelity benchmark functions, their cost models, and empirical
Pareto-front oracles.

Each function takes inputs in the unit box and a fidelity s in [0, 1];
s = 1 is the target fidelity. Raw outputs are mapped through a frozen
per-objective affine normalization so that the zero vector is a valid
hypervolume reference point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .acquisition import CostModel
from .pareto import ParetoFront, hypervolume

__all__ = [
    "Problem",
    "OracleFront",
    "forrester_mf",
    "branin_currin_mf",
    "park_mf",
    "get_problem",
    "oracle_front",
    "estimate_normalization",
    "PROBLEM_NAMES",
]


def _check_box(name: str, arr: np.ndarray):
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} outside the unit box")


def forrester_base(x):
    x = np.asarray(x, dtype=float)
    return (6.0 * x - 2.0) ** 2 * np.sin(12.0 * x - 4.0) + 7.025


def forrester_mf(x, s):
    """Single-objective multi-fidelity Forrester variant with a fidelity-
    and position-dependent input shift; maximized at every fidelity."""
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    _check_box("x", x)
    _check_box("s", s)
    a = 0.5 + 0.5 * s
    b = 2.0 - 2.0 * s
    c = 5.0 * s - 5.0
    d = 1.5 - 0.5 * s
    shifted = x - 0.2 * (1.0 - x * s)
    g = a * forrester_base(shifted) + b * (x - 0.5) - c
    return d * (25.0 - g)


def branin_currin_mf(x, s):
    """Modified Branin and Currin pair; at s = 1 the first objective is the
    negated classical Branin on the rescaled domain."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    s = np.asarray(s, dtype=float)
    if x.shape[-1] != 2:
        raise ValueError("branin-currin expects 2-D inputs")
    _check_box("x", x)
    _check_box("s", s)
    x11 = 15.0 * x[..., 0] - 5.0
    x22 = 15.0 * x[..., 1]
    b = 5.1 / (4.0 * np.pi**2) - 0.01 * (1.0 - s)
    c = 5.0 / np.pi - 0.1 * (1.0 - s)
    t = 1.0 / (8.0 * np.pi) + 0.05 * (1.0 - s)
    branin = -(
        (x22 - b * x11**2 + c * x11 - 6.0) ** 2
        + 10.0 * (1.0 - t) * np.cos(x11)
        + 10.0
    )
    x2 = x[..., 1]
    with np.errstate(divide="ignore"):
        damp = np.where(x2 > 0.0, np.exp(-1.0 / (2.0 * np.where(x2 > 0.0, x2, 1.0))), 0.0)
    currin = -(
        (1.0 - 0.1 * (1.0 - s) * damp)
        * (2300.0 * x[..., 0] ** 3 + 1900.0 * x[..., 0] ** 2 + 2092.0 * x[..., 0] + 60.0)
        / (100.0 * x[..., 0] ** 3 + 500.0 * x[..., 0] ** 2 + 4.0 * x[..., 0] + 20.0)
    )
    return np.stack([branin, currin], axis=-1)


def park_transform(x):
    """Input warp placing the interesting region away from the box corners."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    out[..., 0] = 1.0 - 2.0 * (x[..., 0] - 0.6) ** 2
    out[..., 1] = x[..., 1]
    out[..., 2] = 1.0 - 3.0 * (x[..., 2] - 0.5) ** 2
    out[..., 3] = 1.0 - (x[..., 3] - 0.8) ** 2
    return out


def park_mf(x, s):
    """Modified Park 1 and Park 2 pair on the warped 4-D input space."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    s = np.asarray(s, dtype=float)
    if x.shape[-1] != 4:
        raise ValueError("park expects 4-D inputs")
    _check_box("x", x)
    _check_box("s", s)
    z = park_transform(x)
    a = 0.9 + 0.1 * s
    b = 0.1 * (1.0 - s)
    x1, x2, x3, x4 = z[..., 0], z[..., 1], z[..., 2], z[..., 3]
    t1 = (x1 + 0.001 * (1.0 - s)) / 2.0 * np.sqrt(1.0 + (x2 + x3**2) * x4 / x1**2)
    t2 = (x1 + 3.0 * x4) * np.exp(1.0 + np.sin(x3))
    p1 = a * (t1 + t2 - b) / 22.0 - 0.8
    p2 = a * (5.0 - 2.0 / 3.0 * np.exp(x1 + x2) - x4 * np.sin(x3) * a + x3 - b) / 4.0 - 0.7
    return np.stack([p1, p2], axis=-1)


@dataclass(frozen=True)
class Problem:
    """A multi-fidelity multi-objective test function bundle."""

    name: str
    input_dim: int
    objective_count: int
    cost_model: CostModel
    offsets: np.ndarray
    scales: np.ndarray
    raw: Callable

    def evaluate(self, x, s: float) -> np.ndarray:
        """Raw objective vector at one input point and fidelity."""
        return np.asarray(self.raw(x, s), dtype=float).reshape(self.objective_count)

    def evaluate_many(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Vectorized raw objectives for rows of ``x`` and matching ``s``."""
        out = np.asarray(self.raw(x, s), dtype=float)
        return out.reshape(len(np.atleast_2d(x)), self.objective_count)

    def normalize(self, y_raw) -> np.ndarray:
        return (np.asarray(y_raw, dtype=float) - self.offsets) / self.scales


# Frozen per-objective affine normalization (offset, scale), applied as
# (raw - offset) / scale. Branin-Currin maps (raw + 21)/22 and
# (raw + 14)/15 place only the goal region above the zero hypervolume
# reference; points elsewhere normalize negative and count nothing, which
# keeps the hypervolume fraction discriminative. (A min-max map over the
# observable range would let one mid-quality point cover ~90% of the
# oracle hypervolume, flattening every convergence curve.) The Park
# formulas embed their scaling already, and Forrester is single-objective,
# so its constants are the min/range of a 50 000-point sample
# (estimate_normalization with seed 0).
_NORMALIZATION = {
    "forrester": ([2.2948342731918614], [25.585686806302082]),
    "branin-currin": ([-21.0, -14.0], [22.0, 15.0]),
    "park": ([0.0, 0.0], [1.0, 1.0]),
}

_RAW_FUNCTIONS = {
    "forrester": (lambda x, s: np.asarray(forrester_mf(np.asarray(x, dtype=float).reshape(-1), s), dtype=float).reshape(-1, 1), 1, 1, 5.0),
    "branin-currin": (branin_currin_mf, 2, 2, 4.8),
    "park": (park_mf, 4, 2, 4.8),
}

PROBLEM_NAMES = tuple(_RAW_FUNCTIONS)


def get_problem(name: str, cost_coefficient: float | None = None, fixed_cost: float = 0.0) -> Problem:
    """Look up a benchmark problem by name."""
    if name not in _RAW_FUNCTIONS:
        raise KeyError(f"unknown problem {name!r}; expected one of {sorted(_RAW_FUNCTIONS)}")
    raw, dim, k, default_a = _RAW_FUNCTIONS[name]
    offsets, scales = _NORMALIZATION[name]
    a = default_a if cost_coefficient is None else float(cost_coefficient)
    return Problem(
        name=name,
        input_dim=dim,
        objective_count=k,
        cost_model=CostModel(a, fixed_cost),
        offsets=np.asarray(offsets, dtype=float),
        scales=np.asarray(scales, dtype=float),
        raw=raw,
    )


def estimate_normalization(name: str, n: int = 50_000, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Per-objective (offset, scale) from a uniform sample over inputs and
    fidelities; offset is the sample minimum and scale the sample range."""
    raw, dim, k, _ = _RAW_FUNCTIONS[name]
    rng = np.random.default_rng(seed)
    x = rng.uniform(size=(n, dim))
    s = rng.uniform(size=n)
    y = np.asarray(raw(x, s), dtype=float).reshape(n, k)
    lo = y.min(axis=0)
    hi = y.max(axis=0)
    return lo, hi - lo


@dataclass(frozen=True)
class OracleFront:
    """Empirical approximation of the target-fidelity Pareto front."""

    samples: np.ndarray  # normalized objective vectors of all sampled points
    front: ParetoFront
    hypervolume: float


def oracle_front(problem: Problem, n: int, seed: int = 0) -> OracleFront:
    """Dense random sample of the problem at s = 1: normalized objective
    vectors, their nondominated subset, and its hypervolume from zero."""
    if n < 1000:
        raise ValueError("oracle sampling needs at least 1000 points")
    rng = np.random.default_rng(seed)
    x = rng.uniform(size=(n, problem.input_dim))
    y = problem.normalize(problem.evaluate_many(x, np.ones(n)))
    front = ParetoFront.from_observations(y, np.zeros(problem.objective_count))
    return OracleFront(samples=y, front=front, hypervolume=hypervolume(front))
