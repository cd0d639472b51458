"""Quadrilateral meshes, piecewise-linear reparameterizations and alignment."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DomainError(ValueError):
    """Evaluation outside ``[0, P] x [0, T]``."""


@dataclass(frozen=True, eq=False)
class QuadMesh:
    """A moving curve: ``T + 1`` polylines of ``P`` segments, bilinearly interpolated.

    ``vertices[t, p]`` is the point at position ``p`` and timestamp ``t``.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.ndim != 3 or v.shape[0] < 1 or v.shape[1] < 2 or v.shape[2] < 1:
            raise ValueError(f"vertices must have shape (T+1, P+1, dim) with P >= 1, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("mesh vertices must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def P(self) -> int:
        return self.vertices.shape[1] - 1

    @property
    def T(self) -> int:
        return self.vertices.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.vertices.shape[2]

    def __eq__(self, other):
        return isinstance(other, QuadMesh) and np.array_equal(self.vertices, other.vertices)

    def __repr__(self):
        return f"QuadMesh(P={self.P}, T={self.T}, dim={self.dim})"

    def __call__(self, p, t):
        return eval_mesh(self, p, t)

    def row(self, t: int) -> np.ndarray:
        return self.vertices[t]

    @classmethod
    def static(cls, points) -> "QuadMesh":
        """A curve that does not move (``T = 0``)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        return cls(pts[None, :, :])

    def to_json(self) -> dict:
        return {"P": self.P, "T": self.T, "dim": self.dim, "vertices": self.vertices.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "QuadMesh":
        mesh = cls(np.array(data["vertices"], dtype=float))
        for key in ("P", "T", "dim"):
            if key in data and int(data[key]) != getattr(mesh, key):
                raise ValueError(f"mesh header {key}={data[key]} disagrees with vertex grid")
        return mesh


def _locate(x, n):
    """Cell index and local coordinate of ``x`` on a unit grid with ``n`` segments."""
    if n == 0:
        return np.zeros_like(x, dtype=int), np.zeros_like(x, dtype=float)
    i = np.clip(np.floor(x).astype(int), 0, n - 1)
    return i, x - i


def eval_mesh(mesh: QuadMesh, p, t):
    """Bilinear evaluation; ``p`` and ``t`` may be scalars or broadcastable arrays."""
    p_arr = np.asarray(p, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    tol = 1e-12
    if np.any(p_arr < -tol) or np.any(p_arr > mesh.P + tol) or np.any(t_arr < -tol) or np.any(t_arr > mesh.T + tol):
        raise DomainError(f"({p}, {t}) outside [0,{mesh.P}]x[0,{mesh.T}]")
    p_arr = np.clip(p_arr, 0, mesh.P)
    t_arr = np.clip(t_arr, 0, mesh.T)
    p_arr, t_arr = np.broadcast_arrays(p_arr, t_arr)
    i, u = _locate(p_arr, mesh.P)
    j, w = _locate(t_arr, mesh.T)
    V = mesh.vertices
    j1 = np.minimum(j + 1, mesh.T)
    u = u[..., None]
    w = w[..., None]
    lower = (1 - u) * V[j, i] + u * V[j, i + 1]
    upper = (1 - u) * V[j1, i] + u * V[j1, i + 1]
    out = (1 - w) * lower + w * upper
    return out


def _grid_with_cuts(n: int, cuts) -> np.ndarray:
    cuts = np.asarray(list(cuts), dtype=float)
    if cuts.size:
        if np.any(np.diff(cuts) <= 0):
            raise ValueError("cuts must be sorted and duplicate-free")
        if cuts[0] <= 0 or cuts[-1] >= n:
            raise ValueError(f"cuts must lie strictly inside (0, {n})")
    grid = np.union1d(np.arange(n + 1, dtype=float), cuts)
    return grid


def subdivision_coords(mesh: QuadMesh, p_cuts=(), t_cuts=()) -> tuple[np.ndarray, np.ndarray]:
    """Original parameter values of the vertex grid produced by :func:`subdivide`."""
    return _grid_with_cuts(mesh.P, p_cuts), _grid_with_cuts(mesh.T, t_cuts)


def subdivide(mesh: QuadMesh, p_cuts=(), t_cuts=()) -> QuadMesh:
    """Insert extra vertex columns/rows without changing the surface.

    The result lives on a unit grid again; vertex ``(k, l)`` sits at original
    parameters ``(pg[k], tg[l])`` from :func:`subdivision_coords`.
    """
    pg, tg = subdivision_coords(mesh, p_cuts, t_cuts)
    P, T = np.meshgrid(pg, tg)
    return QuadMesh(eval_mesh(mesh, P, T))


@dataclass(frozen=True, eq=False)
class Reparameterization:
    """Nondecreasing piecewise-linear surjection ``[0, L] -> [0, L']``."""

    breakpoints: np.ndarray

    def __post_init__(self):
        bp = np.array(self.breakpoints, dtype=float)
        if bp.ndim != 2 or bp.shape[1] != 2 or bp.shape[0] < 2:
            raise ValueError("breakpoints must be a list of at least two (input, output) pairs")
        if not np.all(np.isfinite(bp)):
            raise ValueError("breakpoints must be finite")
        if bp[0, 0] != 0 or bp[0, 1] != 0:
            raise ValueError("reparameterization must map 0 to 0")
        if np.any(np.diff(bp[:, 0]) <= 0):
            raise ValueError("breakpoint inputs must be strictly increasing")
        if np.any(np.diff(bp[:, 1]) < 0):
            raise ValueError("breakpoint outputs must be nondecreasing")
        bp.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)

    @property
    def domain_end(self) -> float:
        return float(self.breakpoints[-1, 0])

    @property
    def codomain_end(self) -> float:
        return float(self.breakpoints[-1, 1])

    def __len__(self):
        return len(self.breakpoints)

    def __eq__(self, other):
        return isinstance(other, Reparameterization) and np.array_equal(self.breakpoints, other.breakpoints)

    def __call__(self, x):
        return np.interp(x, self.breakpoints[:, 0], self.breakpoints[:, 1])

    def inverse(self, y):
        """Left-most preimage; flat pieces resolve to their left end."""
        bp = self.breakpoints
        y = np.asarray(y, dtype=float)
        k = np.clip(np.searchsorted(bp[:, 1], y, side="left"), 1, len(bp) - 1)
        y0, y1 = bp[k - 1, 1], bp[k, 1]
        x0, x1 = bp[k - 1, 0], bp[k, 0]
        frac = np.where(y1 > y0, (y - y0) / np.where(y1 > y0, y1 - y0, 1.0), 0.0)
        out = x0 + frac * (x1 - x0)
        out = np.where(y <= bp[0, 1], bp[0, 0], out)
        return float(out) if out.ndim == 0 else out

    def compose(self, other: "Reparameterization") -> "Reparameterization":
        """``self`` after ``other``."""
        xs = np.union1d(other.breakpoints[:, 0], other.inverse(self.breakpoints[:, 0]))
        xs = xs[(xs >= 0) & (xs <= other.domain_end)]
        return Reparameterization(np.column_stack([xs, self(other(xs))]))

    @classmethod
    def identity(cls, length: float) -> "Reparameterization":
        return cls([[0.0, 0.0], [float(length), float(length)]])

    @classmethod
    def linear(cls, length: float, target: float) -> "Reparameterization":
        return cls([[0.0, 0.0], [float(length), float(target)]])

    def to_json(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "Reparameterization":
        return cls(data["breakpoints"])


@dataclass(frozen=True, eq=False)
class MonotonePath:
    """Bimonotone polyline from ``(0, 0)`` to ``(La, Lb)``.

    Unlike a :class:`Reparameterization` it may contain vertical pieces, so it
    also represents the closure matchings where one parameter value of ``a``
    corresponds to an interval of ``b``.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 1:
            raise ValueError("path needs (a, b) points")
        if np.any(np.diff(pts, axis=0) < 0):
            raise ValueError("path must be nondecreasing in both coordinates")
        if pts[0, 0] != 0 or pts[0, 1] != 0:
            raise ValueError("path must start at (0, 0)")
        keep = np.ones(len(pts), dtype=bool)
        keep[1:] = np.any(np.diff(pts, axis=0) > 0, axis=1)
        pts = pts[keep]
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def end(self) -> tuple[float, float]:
        return float(self.points[-1, 0]), float(self.points[-1, 1])

    @classmethod
    def from_reparam(cls, r: Reparameterization) -> "MonotonePath":
        return cls(r.breakpoints)

    def refined(self) -> np.ndarray:
        """Path vertices plus every point where either coordinate crosses an integer."""
        out = [self.points[0]]
        for p, q in zip(self.points[:-1], self.points[1:]):
            cuts = {0.0, 1.0}
            for axis in (0, 1):
                lo, hi = p[axis], q[axis]
                if hi > lo:
                    for k in range(int(np.floor(lo)) + 1, int(np.ceil(hi))):
                        cuts.add((k - lo) / (hi - lo))
            for s in sorted(cuts)[1:]:
                out.append(p + s * (q - p))
        arr = np.array(out)
        # integer crossings computed by division can land a hair off the grid
        rounded = np.round(arr)
        close = np.abs(arr - rounded) < 1e-12
        arr[close] = rounded[close]
        return arr


def _as_path(r, length_a, length_b) -> MonotonePath:
    if r is None:
        if length_a != length_b:
            raise ValueError("identity matching needs equal parameter lengths")
        return MonotonePath([[0, 0], [length_a, length_a]])
    path = r if isinstance(r, MonotonePath) else MonotonePath.from_reparam(r)
    end = path.end
    if not (np.isclose(end[0], length_a) and np.isclose(end[1], length_b)):
        raise ValueError(f"matching ends at {end}, expected ({length_a}, {length_b})")
    return path


def align_meshes(a: QuadMesh, b: QuadMesh, pi=None, tau=None) -> tuple[QuadMesh, QuadMesh]:
    """Resample ``a`` and ``b`` so vertex ``(i, j)`` of both correspond under ``(pi, tau)``.

    ``pi``/``tau`` are :class:`Reparameterization` or :class:`MonotonePath`
    objects (``None`` means identity).  Each output cell is a bilinear patch of
    its source, so both outputs trace exactly the original surfaces.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    pos = _as_path(pi, a.P, b.P).refined()
    tim = _as_path(tau, a.T, b.T).refined()
    if len(pos) < 2:
        raise ValueError("position matching must cover a nontrivial interval")
    pa, ta = np.meshgrid(np.clip(pos[:, 0], 0, a.P), np.clip(tim[:, 0], 0, a.T))
    pb, tb = np.meshgrid(np.clip(pos[:, 1], 0, b.P), np.clip(tim[:, 1], 0, b.T))
    return QuadMesh(eval_mesh(a, pa, ta)), QuadMesh(eval_mesh(b, pb, tb))


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
