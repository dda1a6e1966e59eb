"""Pareto dominance, hypervolume, and hypervolume-improvement computations.

All routines use the maximization convention: a front point is "better" the
larger its coordinates, and the hypervolume is measured from a reference
point that every front member must strictly dominate.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ParetoFront",
    "dominates",
    "nondominated",
    "hypervolume",
    "hvi",
    "nondominated_cells",
]


def dominates(a, b) -> bool:
    """True iff ``a`` is >= ``b`` in every coordinate and > in at least one."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a >= b) and np.any(a > b))


def nondominated(points) -> np.ndarray:
    """Maximal nondominated subset of ``points`` (duplicates collapsed).

    Returns a 2-D array whose rows are pairwise nondominating. The row
    order is lexicographic descending in the first objective.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return pts.reshape(0, pts.shape[1] if pts.ndim == 2 else 0)
    if pts.ndim != 2:
        raise ValueError("expected a 2-D array of objective vectors")
    pts = np.unique(pts, axis=0)  # also sorts lexicographically ascending
    if pts.shape[1] == 1:
        return pts[-1:].copy()
    if pts.shape[1] == 2:
        return _nondominated_2d(pts)
    keep = np.ones(len(pts), dtype=bool)
    for i in range(len(pts)):
        ge = np.all(pts >= pts[i], axis=1)
        gt = np.any(pts > pts[i], axis=1)
        if np.any(ge & gt):
            keep[i] = False
    out = pts[keep]
    return out[np.lexsort(out.T[::-1])][::-1]


def _nondominated_2d(pts: np.ndarray) -> np.ndarray:
    # pts unique and lexicographically ascending; scan descending in the
    # first coordinate keeping the running max of the second.
    pts = pts[::-1]
    best = -np.inf
    keep = []
    for i, (_, b) in enumerate(pts):
        if b > best:
            keep.append(i)
            best = b
    return pts[keep]


@dataclass(frozen=True)
class ParetoFront:
    """A set of mutually nondominating points, all strictly above ``reference``."""

    points: np.ndarray
    reference: np.ndarray

    def __post_init__(self):
        ref = np.asarray(self.reference, dtype=float).reshape(-1)
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, ref.shape[0])
        if pts.ndim != 2 or pts.shape[1] != ref.shape[0]:
            raise ValueError("front points and reference dimensions differ")
        if np.any(pts <= ref):
            raise ValueError("every front point must strictly dominate the reference")
        nd = nondominated(pts)
        if len(nd) != len(np.unique(pts, axis=0)):
            raise ValueError("front contains dominated points")
        object.__setattr__(self, "points", nd)
        object.__setattr__(self, "reference", ref)
        self.points.setflags(write=False)
        self.reference.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.reference.shape[0]

    @classmethod
    def from_observations(cls, points, reference) -> "ParetoFront":
        """Build a front from arbitrary vectors, dropping any that fail to
        dominate the reference and filtering the rest to the maximal subset."""
        ref = np.asarray(reference, dtype=float).reshape(-1)
        pts = np.asarray(points, dtype=float)
        if pts.size == 0:
            return cls(np.empty((0, ref.shape[0])), ref)
        good = pts[np.all(pts > ref, axis=1)]
        return cls(nondominated(good) if len(good) else good, ref)


def hypervolume(front: ParetoFront) -> float:
    """Exact volume dominated by the front relative to its reference."""
    return _hv(front.points, front.reference)


def _hv(pts: np.ndarray, ref: np.ndarray) -> float:
    if len(pts) == 0:
        return 0.0
    k = pts.shape[1]
    if k == 1:
        return float(pts.max() - ref[0])
    if k == 2:
        return _hv_2d(pts, ref)
    # Slice the dominated region along the last objective: within each slab
    # only points reaching past its top contribute, via their projections.
    levels = np.concatenate(([ref[-1]], np.unique(pts[:, -1])))
    total = 0.0
    for t in range(len(levels) - 1):
        members = pts[pts[:, -1] >= levels[t + 1], :-1]
        total += (levels[t + 1] - levels[t]) * _hv(nondominated(members), ref[:-1])
    return total


def _hv_2d(pts: np.ndarray, ref: np.ndarray) -> float:
    # descending sweep: one strip per front point, widths between
    # consecutive first coordinates, heights down to the reference
    nd = _nondominated_2d(np.unique(pts, axis=0))
    xs = np.concatenate((nd[:, 0], [ref[0]]))
    area = 0.0
    for i in range(len(nd)):
        area += (xs[i] - xs[i + 1]) * (nd[i, 1] - ref[1])
    return float(area)


def hvi(front: ParetoFront, y) -> float:
    """Hypervolume improvement of adding ``y`` to ``front``.

    Exactly zero when ``y`` is dominated by (or equal to) a front member or
    fails to strictly dominate the reference; never negative.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != front.dim:
        raise ValueError("candidate dimension differs from front dimension")
    if np.any(y <= front.reference):
        return 0.0
    if len(front.points) and np.any(np.all(front.points >= y, axis=1)):
        return 0.0
    merged = np.vstack([front.points, y[None, :]]) if len(front.points) else y[None, :]
    gain = _hv(nondominated(merged), front.reference) - _hv(front.points, front.reference)
    return max(float(gain), 0.0)


# ---------------------------------------------------------------------------
# Box decomposition of the nondominated region
# ---------------------------------------------------------------------------

def nondominated_cells(front: ParetoFront) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint axis-aligned boxes covering the region above the reference
    that is not dominated by the front.

    Returns ``(lower, upper)`` arrays of shape (n_cells, dim); upper bounds
    may be ``+inf``. The hypervolume improvement of a candidate ``y`` equals
    the summed volume of ``[reference, y]`` intersected with these boxes,
    which is what makes Monte-Carlo EHVI cheap to batch.
    """
    lower, upper = _cells(front.points, front.reference)
    return np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)


def _cells(pts: np.ndarray, ref: np.ndarray):
    k = ref.shape[0]
    if len(pts) == 0:
        return [list(ref)], [[np.inf] * k]
    if k == 1:
        return [[float(pts.max())]], [[np.inf]]
    if k == 2:
        return _cells_2d(nondominated(pts), ref)
    if k == 3:
        return _cells_3d(pts, ref)
    # generic slab recursion over the last objective
    levels = np.concatenate(([ref[-1]], np.unique(pts[:, -1]), [np.inf]))
    lower: list[list[float]] = []
    upper: list[list[float]] = []
    for t in range(len(levels) - 1):
        if t + 1 < len(levels) - 1:
            members = pts[pts[:, -1] >= levels[t + 1], :-1]
            members = nondominated(members)
        else:
            members = pts[:0, :-1]
        lo, up = _cells(members, ref[:-1])
        for lo_j, up_j in zip(lo, up):
            lower.append(list(lo_j) + [float(levels[t])])
            upper.append(list(up_j) + [float(levels[t + 1])])
    return lower, upper


def _cells_2d(nd: np.ndarray, ref: np.ndarray):
    # nd sorted descending in the first coordinate (ascending in the second)
    a = nd[:, 0]
    b = nd[:, 1]
    lower = [[float(a[0]), float(ref[1])]]
    upper = [[np.inf, np.inf]]
    for j in range(len(nd)):
        left = float(a[j + 1]) if j + 1 < len(nd) else float(ref[0])
        lower.append([left, float(b[j])])
        upper.append([float(a[j]), np.inf])
    return lower, upper


def _cells_3d(pts: np.ndarray, ref: np.ndarray):
    """Sweep the third objective downward maintaining the 2-D staircase;
    every staircase strip alive over a span of levels becomes one box."""
    order = np.lexsort((-pts[:, 1], -pts[:, 0], -pts[:, 2]))
    pts = pts[order]
    levels = np.unique(pts[:, 2])[::-1]
    stair_a: list[float] = []  # first coordinates, descending
    stair_b: list[float] = []  # second coordinates, ascending
    # strip: [left, bottom, right, level_created]
    strips: list[list[float]] = [[float(ref[0]), float(ref[1]), np.inf, np.inf]]
    lower: list[list[float]] = []
    upper: list[list[float]] = []

    def close(strip, level):
        if strip[3] > level:
            lower.append([strip[0], strip[1], level])
            upper.append([strip[2], np.inf, strip[3]])

    for level in levels:
        level = float(level)
        batch = pts[pts[:, 2] == level]
        for p in batch:
            a, b = float(p[0]), float(p[1])
            # staircase points with first coordinate >= a form a prefix
            neg_a = [-v for v in stair_a]
            ge_end = bisect.bisect_right(neg_a, -a)  # first index with stair_a < a
            if ge_end >= 1 and stair_b[ge_end - 1] >= b:
                continue  # 2-D dominated: staircase unchanged
            i0 = bisect.bisect_left(neg_a, -a)  # first index with stair_a <= a
            r = bisect.bisect_right(stair_b, b)  # first index with stair_b > b
            for j in range(i0, r + 1):
                close(strips[j], level)
            right_bound = stair_a[i0 - 1] if i0 >= 1 else np.inf
            bottom = stair_b[i0 - 1] if i0 >= 1 else float(ref[1])
            left_bound = stair_a[r] if r < len(stair_a) else float(ref[0])
            new_strips = [
                [a, bottom, right_bound, level],
                [left_bound, b, a, level],
            ]
            strips[i0 : r + 1] = new_strips
            stair_a[i0:r] = [a]
            stair_b[i0:r] = [b]
    for strip in strips:
        close(strip, float(ref[2]))
    return lower, upper


def hvi_from_cells(y, lower: np.ndarray, upper: np.ndarray) -> float:
    """Hypervolume improvement computed against a precomputed decomposition."""
    y = np.asarray(y, dtype=float)
    width = np.clip(np.minimum(y, upper) - lower, 0.0, None)
    return float(np.prod(width, axis=-1).sum())
