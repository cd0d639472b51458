"""Obstacles of the 3D free space, one per grid point.

The obstacle of grid point ``g`` is the largest connected infeasible set
inside the (up to eight) cells around ``g`` that contains ``g``.  Because
every cell component contains a cell corner, two components of neighbouring
cells touch exactly when they share an infeasible corner, so obstacles are
unions of cell components linked through shared grid points.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..geometry import Norm
from ..mesh import QuadMesh
from .cells import CellFeatures, corner_differences

U, D = "u", "d"


@dataclass(frozen=True)
class Piece:
    """One infeasible component of one cell."""

    id: int
    cell: tuple
    local: frozenset
    points: frozenset
    tmin: float
    tmax: float


@dataclass
class Obstacle:
    id: object
    pieces: frozenset = frozenset()
    tmin: float = np.inf
    tmax: float = -np.inf
    dummy: bool = False
    touches_u: bool = False
    touches_d: bool = False

    @property
    def points(self):
        return self.id


def _prepare(a: QuadMesh, b: QuadMesh):
    if a.T != b.T:
        raise ValueError(f"meshes must share T (got {a.T} and {b.T})")
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    if a.T == 0:
        # a static pair is the time-invariant pair with one layer
        a = QuadMesh(np.concatenate([a.vertices, a.vertices]))
        b = QuadMesh(np.concatenate([b.vertices, b.vertices]))
    return a, b


class FreeSpace3D:
    """Lazily evaluated cells of ``{(x, y, t) : ||A(x, t) - B(y, t)|| <= eps}``."""

    def __init__(self, a: QuadMesh, b: QuadMesh, eps: float, norm=Norm.L2, connectivity="exact"):
        self.a, self.b = _prepare(a, b)
        self.eps = float(eps)
        self.norm = Norm.parse(norm)
        self.connectivity = connectivity
        self.P, self.Q, self.T = self.a.P, self.b.P, self.a.T
        self._cells = {}

    def cell(self, x: int, y: int, l: int) -> CellFeatures:
        key = (x, y, l)
        if key not in self._cells:
            if not (0 <= x < self.P and 0 <= y < self.Q and 0 <= l < self.T):
                raise IndexError(f"cell {key} out of range")
            dc = corner_differences(self.a, self.b, x, y, l)
            self._cells[key] = CellFeatures.build(dc, self.eps, self.norm, x, y, l, self.connectivity)
        return self._cells[key]

    def cells(self):
        for l in range(self.T):
            for x in range(self.P):
                for y in range(self.Q):
                    yield self.cell(x, y, l)

    def grid_points(self):
        for t in range(self.T + 1):
            for x in range(self.P + 1):
                for y in range(self.Q + 1):
                    yield (x, y, t)

    def point_free(self, g) -> bool:
        x, y, t = g
        return self.norm(self.a.vertices[t, x] - self.b.vertices[t, y]) <= self.eps

    def cells_around(self, g):
        x, y, t = g
        for cx in (x - 1, x):
            for cy in (y - 1, y):
                for cl in (t - 1, t):
                    if 0 <= cx < self.P and 0 <= cy < self.Q and 0 <= cl < self.T:
                        yield (cx, cy, cl)

    @cached_property
    def pieces(self) -> dict:
        """All cell components keyed by ``(cell, component index)``."""
        out = {}
        for cf in self.cells():
            for n, comp in enumerate(cf.components):
                lo, hi = np.inf, -np.inf
                for c in comp:
                    (a, b), (ao, bo) = cf.corner_trange(c), cf.corner_topen(c)
                    # open ends move one ulp inwards so that closed comparisons become strict
                    a, b = cf.l + a, cf.l + b
                    lo = min(lo, np.nextafter(a, np.inf) if ao else a)
                    hi = max(hi, np.nextafter(b, -np.inf) if bo else b)
                pts = frozenset((cf.x + i, cf.y + j, cf.l + k) for i, j, k in comp)
                out[(cf.x, cf.y, cf.l), n] = Piece(len(out), (cf.x, cf.y, cf.l), comp, pts, float(lo), float(hi))
        return out

    def min_slack(self) -> float:
        return min((cf.slack for cf in self.cells()), default=np.inf)


def extract_obstacles(fs: FreeSpace3D):
    """Return ``(obstacles, u, d)``; ``obstacles`` maps grid points to :class:`Obstacle`."""
    pieces = fs.pieces
    by_cell = {}
    for (cell, _), pc in pieces.items():
        by_cell.setdefault(cell, []).append(pc)
    obstacles = {}
    for g in fs.grid_points():
        if fs.point_free(g):
            obstacles[g] = Obstacle(g, dummy=True)
            continue
        block = list(fs.cells_around(g))
        reached = {g}
        members = set()
        frontier = [g]
        while frontier:
            p = frontier.pop()
            for cell in block:
                for pc in by_cell.get(cell, ()):
                    if pc.id not in members and p in pc.points:
                        members.add(pc.id)
                        for q in pc.points:
                            if q not in reached:
                                reached.add(q)
                                frontier.append(q)
        chosen = [pc for pcs in by_cell.values() for pc in pcs if pc.id in members]
        pts = set().union(*(pc.points for pc in chosen)) if chosen else {g}
        obstacles[g] = Obstacle(
            g,
            pieces=frozenset(members),
            tmin=min((pc.tmin for pc in chosen), default=float(g[2])),
            tmax=max((pc.tmax for pc in chosen), default=float(g[2])),
            touches_u=any(x == 0 or y == fs.Q for x, y, _ in pts),
            touches_d=any(y == 0 or x == fs.P for x, y, _ in pts),
        )
    return obstacles, Obstacle(U), Obstacle(D)
