"""Threshold queries and Pareto frontiers over a fixed matrix.

Each row is stored as a min segment tree, which answers "leftmost column in a
range with value at most ``t``" in logarithmic time.  A frontier query walks
the rows of a rectangle and shrinks the column range after every hit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class QueryStats:
    leftmost: int = 0
    frontier: int = 0


class ThresholdMatrix:
    """Immutable matrix ``M[row][col]`` with per-row min trees."""

    def __init__(self, values):
        m = np.array(values, dtype=float)
        if m.ndim != 2 or m.size == 0:
            raise ValueError("matrix must be 2-D and nonempty")
        self.values = m
        self.n_rows, self.n_cols = m.shape
        size = 1
        while size < self.n_cols:
            size *= 2
        self._size = size
        tree = np.full((self.n_rows, 2 * size), np.inf)
        tree[:, size:size + self.n_cols] = m
        for node in range(size - 1, 0, -1):
            tree[:, node] = np.minimum(tree[:, 2 * node], tree[:, 2 * node + 1])
        tree.setflags(write=False)
        self._tree = tree
        self.stats = QueryStats()

    def _check_row(self, row):
        if not 0 <= row < self.n_rows:
            raise ValueError(f"row {row} outside 0..{self.n_rows - 1}")

    def leftmost_leq(self, row: int, x0: int, x1: int, threshold: float):
        """Smallest column ``x`` in ``[x0, x1]`` with ``M[row][x] <= threshold``, else ``None``."""
        self._check_row(row)
        if not 0 <= x0 <= x1 < self.n_cols:
            raise ValueError(f"bad column range [{x0}, {x1}] for {self.n_cols} columns")
        self.stats.leftmost += 1
        tree = self._tree[row]
        return self._descend(tree, 1, 0, self._size - 1, x0, x1, threshold)

    def _descend(self, tree, node, lo, hi, x0, x1, thr):
        if hi < x0 or lo > x1 or tree[node] > thr:
            return None
        if lo == hi:
            return lo
        mid = (lo + hi) // 2
        hit = self._descend(tree, 2 * node, lo, mid, x0, x1, thr)
        if hit is not None:
            return hit
        return self._descend(tree, 2 * node + 1, mid + 1, hi, x0, x1, thr)

    def pareto_frontier(self, rect, threshold: float) -> "FrontierResult":
        """Minimal set of cells ``(x, y)`` with value ``<= threshold`` dominating all others in ``rect``.

        ``rect = (x0, y0, x1, y1)`` with inclusive bounds; a point ``(x', y')``
        dominates ``(x, y)`` when ``x' <= x`` and ``y' <= y``.
        """
        x0, y0, x1, y1 = rect
        if not (0 <= x0 <= x1 < self.n_cols and 0 <= y0 <= y1 < self.n_rows):
            raise ValueError(f"rectangle {rect} outside a {self.n_cols}x{self.n_rows} matrix")
        self.stats.frontier += 1
        points = []
        hi = x1
        for y in range(y0, y1 + 1):
            x = self.leftmost_leq(y, x0, hi, threshold)
            if x is None:
                continue
            points.append((x, y))
            if x == x0:
                break
            hi = x - 1
        return FrontierResult(threshold, tuple(rect), points)


@dataclass
class FrontierResult:
    threshold: float
    rect: tuple
    points: list = field(default_factory=list)


def build(values) -> ThresholdMatrix:
    return ThresholdMatrix(values)


def naive_frontier(values, rect, threshold):
    """Reference Pareto frontier by full scan."""
    m = np.asarray(values, dtype=float)
    x0, y0, x1, y1 = rect
    cells = [(x, y) for y in range(y0, y1 + 1) for x in range(x0, x1 + 1) if m[y, x] <= threshold]
    return sorted(c for c in cells if not any(o != c and o[0] <= c[0] and o[1] <= c[1] for o in cells))
