"""Frechet distance under synchronous dynamic matchings ``mu(p, t) = (pi_t(p), t)``."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import Norm, bisect_threshold
from ..mesh import QuadMesh
from .graph import ObstacleGraph, reduced_edges_E, relation_R
from .obstacles import D, U, FreeSpace3D, Obstacle, extract_obstacles

__all__ = ["DynamicDecision", "FreeSpace3D", "ObstacleGraph", "Obstacle", "compute_id", "decide_id",
           "build_graph", "extract_obstacles", "relation_R", "reduced_edges_E", "U", "D"]


@dataclass
class DynamicDecision:
    accepted: bool
    eps: float
    graph: ObstacleGraph
    min_slack: float
    stats: dict = field(default_factory=dict)

    def __bool__(self):
        return self.accepted


def build_graph(fs: FreeSpace3D, graph: str = "reduced") -> ObstacleGraph:
    obstacles, _, _ = extract_obstacles(fs)
    if graph == "reduced":
        return reduced_edges_E(fs, obstacles)
    if graph == "full":
        return relation_R(fs, obstacles)
    raise ValueError(f"unknown graph mode {graph!r}")


def decide_id(a: QuadMesh, b: QuadMesh, eps: float, norm=Norm.L2, graph: str = "reduced",
              connectivity: str = "exact") -> DynamicDecision:
    """Accept iff no chain of dominating obstacles links ``d`` to ``u``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    fs = FreeSpace3D(a, b, eps, norm, connectivity)
    g = build_graph(fs, graph)
    blocked = g.reachable(D, U)
    stats = dict(g.stats, vertices=len(g.vertices), edges=len(g.edges), cells=len(fs._cells))
    return DynamicDecision(not blocked, float(eps), g, fs.min_slack(), stats)


def upper_bound(a: QuadMesh, b: QuadMesh, norm=Norm.L2) -> float:
    norm = Norm.parse(norm)
    d = norm(a.vertices[:, :, None, :] - b.vertices[:, None, :, :])
    return float(d.max())


def compute_id(a: QuadMesh, b: QuadMesh, norm=Norm.L2, tol: float = 1e-6, graph: str = "reduced",
               connectivity: str = "exact") -> float:
    """Dynamic-matching distance by bisection on the decision procedure."""
    norm = Norm.parse(norm)
    hi = upper_bound(a, b, norm)
    return bisect_threshold(lambda e: decide_id(a, b, e, norm, graph, connectivity).accepted,
                            0.0, hi, tol)
