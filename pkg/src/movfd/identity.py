"""Frechet distance under a fixed matching (identity or predefined PL realignment)."""
from __future__ import annotations

import numpy as np

from .geometry import Norm
from .mesh import QuadMesh, align_meshes


def difference_mesh(a: QuadMesh, b: QuadMesh) -> QuadMesh:
    if a.vertices.shape != b.vertices.shape:
        raise ValueError(f"mesh shapes differ: {a.vertices.shape} vs {b.vertices.shape}")
    return QuadMesh(a.vertices - b.vertices)


def frechet_identity(a: QuadMesh, b: QuadMesh, norm=Norm.L2) -> tuple[float, tuple[int, int]]:
    """Distance under ``mu(p, t) = (p, t)`` and the vertex ``(p, t)`` attaining it.

    Each patch of ``a - b`` lies in the convex hull of its corners, so the
    supremum is a vertex maximum.  Ties go to the smallest ``(t, p)``.
    """
    norm = Norm.parse(norm)
    c = difference_mesh(a, b)
    d = norm(c.vertices)
    flat = int(np.argmax(d))  # first maximum in row-major (t, p) order
    t, p = divmod(flat, d.shape[1])
    return float(d[t, p]), (int(p), int(t))


def frechet_pl(a: QuadMesh, b: QuadMesh, pi=None, tau=None, norm=Norm.L2) -> float:
    """Distance under ``mu(p, t) = (pi(p), tau(t))`` for piecewise-linear ``pi``, ``tau``.

    ``pi`` and ``tau`` may also be :class:`~movfd.mesh.MonotonePath` objects,
    which covers witnesses with vertical pieces.
    """
    a2, b2 = align_meshes(a, b, pi, tau)
    return frechet_identity(a2, b2, norm)[0]
