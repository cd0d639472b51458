"""Dominance relation between obstacles and its sparse equivalent.

``a -> b`` means every matching surface passing above ``a`` must pass above
``b``: the obstacles touch, or at a common time some point of ``b`` lies
weakly right of and below some point of ``a``.  A matching exists iff ``u``
is unreachable from ``d``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..pareto import ThresholdMatrix
from .obstacles import D, U, FreeSpace3D, Obstacle, Piece

SLICE_GRID = 16


@dataclass
class ObstacleGraph:
    vertices: list
    edges: set = field(default_factory=set)
    mode: str = "full"
    stats: dict = field(default_factory=dict)

    def adjacency(self):
        adj = {}
        for s, t in self.edges:
            adj.setdefault(s, []).append(t)
        return adj

    def reachable(self, src=D, dst=U) -> bool:
        adj = self.adjacency()
        seen = {src}
        stack = [src]
        while stack:
            v = stack.pop()
            if v == dst:
                return True
            for w in adj.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    def reach_set(self, src):
        adj = self.adjacency()
        seen = {src}
        queue = deque([src])
        while queue:
            v = queue.popleft()
            for w in adj.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return seen

    def to_json(self) -> dict:
        def key(v):
            return v if isinstance(v, str) else list(v)

        verts = sorted(self.vertices, key=lambda v: (isinstance(v, str), str(v)))
        edges = sorted(self.edges, key=lambda e: (str(e[0]), str(e[1])))
        return {"mode": self.mode, "vertices": [key(v) for v in verts],
                "edges": [[key(s), key(t)] for s, t in edges]}


class _Relation:
    """Cached piece-level dominance tests for one free space."""

    def __init__(self, fs: FreeSpace3D):
        self.fs = fs
        self.pieces = {pc.id: pc for pc in fs.pieces.values()}
        self._cache = {}
        self._slices = {}

    def _slice(self, cell, t):
        key = (cell, t)
        if key not in self._slices:
            cf = self.fs.cell(*cell)
            self._slices[key] = cf.slice(t - cell[2])
        return self._slices[key]

    def _boxes(self, pc: Piece, t):
        out = []
        x, y, _ = pc.cell
        up, down = np.inf, -np.inf
        for sc in self._slice(pc.cell, t):
            if sc.labels & pc.local:
                for b, o in zip(sc.boxes, sc.open):
                    # open ends shrink by one ulp, turning ties into strict comparisons
                    x0, x1, y0, y1 = x + b[0], x + b[1], y + b[2], y + b[3]
                    out.append((np.nextafter(x0, up) if o[0] else x0, np.nextafter(x1, down) if o[1] else x1,
                                np.nextafter(y0, up) if o[2] else y0, np.nextafter(y1, down) if o[3] else y1))
        return out

    def _times(self, pa: Piece, pb: Piece, lo, hi):
        if hi - lo <= 1e-12:
            return [0.5 * (lo + hi)]
        pts = {lo, hi}
        for pc in (pa, pb):
            cf = self.fs.cell(*pc.cell)
            for iv in cf.tedges.values():
                if iv is not None:
                    pts.update(pc.cell[2] + v for v in iv)
        base = np.floor(lo)
        pts.update(base + np.arange(0, 2 * SLICE_GRID + 1) / SLICE_GRID)
        pts = sorted(p for p in pts if lo <= p <= hi)
        return [0.5 * (p + q) for p, q in zip(pts[:-1], pts[1:]) if q - p > 1e-12] or [lo]

    def pieces_related(self, ia: int, ib: int) -> bool:
        if ia == ib:
            return True
        key = (ia, ib)
        if key in self._cache:
            return self._cache[key]
        pa, pb = self.pieces[ia], self.pieces[ib]
        res = self._compute(pa, pb)
        self._cache[key] = res
        return res

    def _compute(self, pa: Piece, pb: Piece) -> bool:
        lo, hi = max(pa.tmin, pb.tmin), min(pa.tmax, pb.tmax)
        if lo > hi:
            return False
        (xa, ya, _), (xb, yb, _) = pa.cell, pb.cell
        if xa > xb + 1 or ya + 1 < yb:
            return False
        if xa + 1 <= xb and ya >= yb + 1:
            return True
        for t in self._times(pa, pb, lo, hi):
            ba, bb = self._boxes(pa, t), self._boxes(pb, t)
            for a0, a1, a2, a3 in ba:
                for b0, b1, b2, b3 in bb:
                    if a0 <= b1 and a3 >= b2:
                        return True
        return False

    def obstacles_related(self, a: Obstacle, b: Obstacle) -> bool:
        if a.dummy or b.dummy:
            return False
        if a.pieces & b.pieces:
            return True
        return any(self.pieces_related(ia, ib) for ia in a.pieces for ib in b.pieces)


def _relation(fs: FreeSpace3D) -> _Relation:
    # one cache per free space, shared by both graph constructions
    rel = getattr(fs, "_relation", None)
    if rel is None:
        rel = fs._relation = _Relation(fs)
    return rel


def _candidates(fs: FreeSpace3D, g, obstacles):
    """Grid points whose obstacles can be related to the obstacle at ``g``."""
    x, y, t = g
    for tb in range(max(0, t - 2), min(fs.T, t + 2) + 1):
        for xb in range(max(0, x - 2), fs.P + 1):
            for yb in range(0, min(fs.Q, y + 2) + 1):
                h = (xb, yb, tb)
                if h != g:
                    yield h


def _boundary_edges(obstacles, edges):
    for g, ob in obstacles.items():
        if ob.dummy:
            continue
        if ob.touches_d:
            edges.add((D, g))
        if ob.touches_u:
            edges.add((g, U))


def relation_R(fs: FreeSpace3D, obstacles) -> ObstacleGraph:
    """Full dominance relation (reference construction)."""
    rel = _relation(fs)
    edges = set()
    _boundary_edges(obstacles, edges)
    for g, ob in obstacles.items():
        if ob.dummy:
            continue
        for h in _candidates(fs, g, obstacles):
            if rel.obstacles_related(ob, obstacles[h]):
                edges.add((g, h))
    return ObstacleGraph(list(obstacles) + [U, D], edges, "full", {"pairs_tested": len(rel._cache)})


def reduced_edges_E(fs: FreeSpace3D, obstacles) -> ObstacleGraph:
    """Sparse edge set with the same ``d -> u`` reachability as :func:`relation_R`.

    Offsets are ``i = x_b - x_a`` and ``j = y_a - y_b``.  Pairs with ``i <= 1``
    or ``j <= 1`` are tested directly; same-time pairs further apart are
    covered by unit grid steps through (possibly dummy) obstacles; the rest
    come from Pareto frontier queries on the ``t-``/``t+`` matrices of each
    time layer.
    """
    rel = _relation(fs)
    edges = set()
    _boundary_edges(obstacles, edges)
    P, Q, T = fs.P, fs.Q, fs.T
    for (x, y, t) in obstacles:
        if x + 1 <= P:
            edges.add(((x, y, t), (x + 1, y, t)))
        if y >= 1:
            edges.add(((x, y, t), (x, y - 1, t)))
    # matrices indexed [row, col] with row = Q - y so upper rows come first
    lower, upper = {}, {}
    for t in range(T + 1):
        lo = np.full((Q + 1, P + 1), np.inf)
        hi = np.full((Q + 1, P + 1), np.inf)
        for x in range(P + 1):
            for y in range(Q + 1):
                ob = obstacles[(x, y, t)]
                if not ob.dummy:
                    lo[Q - y, x] = ob.tmin
                    hi[Q - y, x] = -ob.tmax
        lower[t], upper[t] = ThresholdMatrix(lo), ThresholdMatrix(hi)
    n_pareto = 0
    for g, ob in obstacles.items():
        if ob.dummy:
            continue
        x, y, t = g
        for h in _candidates(fs, g, obstacles):
            i, j = h[0] - x, y - h[1]
            if (i <= 1 or j <= 1) and rel.obstacles_related(ob, obstacles[h]):
                edges.add((g, h))
        if x + 2 > P or y - 2 < 0:
            continue
        rect = (x + 2, Q - (y - 2), P, Q)
        for k in (-2, -1, 1, 2):
            tb = t + k
            if not 0 <= tb <= T:
                continue
            if k > 0:
                res = lower[tb].pareto_frontier(rect, ob.tmax)
            else:
                res = upper[tb].pareto_frontier(rect, -ob.tmin)
            n_pareto += 1
            for col, row in res.points:
                edges.add((g, (col, Q - row, tb)))
    stats = {"pareto_queries": n_pareto,
             "leftmost_queries": sum(m.stats.leftmost for m in list(lower.values()) + list(upper.values())),
             "pairs_tested": len(rel._cache)}
    return ObstacleGraph(list(obstacles) + [U, D], edges, "reduced", stats)
