"""Frechet distance under constant positional matchings ``mu(p, t) = (pi(p), t)``.

Free space in the ``(x, y)`` plane is the intersection over integer
timestamps of the per-layer free spaces; every cell of it is convex, so only
the four boundary intervals of each cell matter.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import ETA, Norm, NumericError, bisect_threshold, intersect, sublevel_interval
from .identity import frechet_identity
from .mesh import MonotonePath, QuadMesh
from .witness import MatchingWitness

FULL = (0.0, 1.0)


def _check_pair(a: QuadMesh, b: QuadMesh):
    if a.T != b.T:
        raise ValueError(f"meshes must share T (got {a.T} and {b.T}); align them first")
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


def boundary_interval(a: QuadMesh, b: QuadMesh, edge, eps: float, norm=Norm.L2):
    """Feasible part of one cell boundary, intersected over all timestamps.

    ``edge = ("v", x, y)`` is the vertical boundary ``{x} x [y, y+1]``;
    ``edge = ("h", x, y)`` is the horizontal boundary ``[x, x+1] x {y}``.
    Returns ``(lo, hi)`` in local coordinates or ``None``.
    """
    _check_pair(a, b)
    norm = Norm.parse(norm)
    kind, x, y = edge
    out = FULL
    for t in range(a.T + 1):
        A, B = a.vertices[t], b.vertices[t]
        if kind == "v":
            d0, d1 = A[x] - B[y], B[y] - B[y + 1]
        elif kind == "h":
            d0, d1 = A[x] - B[y], A[x + 1] - A[x]
        else:
            raise ValueError(f"unknown edge kind {kind!r}")
        out = intersect(out, sublevel_interval(d0, d1, eps, norm))
        if out is None:
            return None
    return out


@dataclass
class FreeSpace2D:
    """Boundary intervals of all cells of the time-intersected free space.

    ``vert[x][y]`` is the interval on ``{x} x [y, y+1]`` (``x`` in ``0..P``),
    ``horiz[x][y]`` the interval on ``[x, x+1] x {y}`` (``y`` in ``0..Q``).
    """

    P: int
    Q: int
    eps: float
    norm: Norm
    vert: list
    horiz: list
    start_free: bool
    end_free: bool

    @classmethod
    def build(cls, a: QuadMesh, b: QuadMesh, eps: float, norm=Norm.L2) -> "FreeSpace2D":
        _check_pair(a, b)
        norm = Norm.parse(norm)
        P, Q = a.P, b.P
        vert = [[boundary_interval(a, b, ("v", x, y), eps, norm) for y in range(Q)] for x in range(P + 1)]
        horiz = [[boundary_interval(a, b, ("h", x, y), eps, norm) for y in range(Q + 1)] for x in range(P)]
        diffs = a.vertices[:, [0, -1]] - b.vertices[:, [0, -1]]
        d = norm(diffs)
        return cls(P, Q, eps, norm, vert, horiz, bool(np.all(d[:, 0] <= eps)), bool(np.all(d[:, 1] <= eps)))


@dataclass
class ReachabilityTable:
    """Reachable parts of the left (``left[x][y]``) and bottom (``bottom[x][y]``) boundaries.

    ``left`` has ``P + 1`` columns so that ``left[P][y]`` is the right edge of
    the last column; likewise ``bottom[x][Q]`` is the top edge of the last row.
    """

    left: list
    bottom: list
    accepted: bool


def propagate(fs: FreeSpace2D) -> ReachabilityTable:
    P, Q = fs.P, fs.Q
    left = [[None] * Q for _ in range(P + 1)]
    bottom = [[None] * (Q + 1) for _ in range(P)]
    if not fs.start_free:
        return ReachabilityTable(left, bottom, False)
    # boundary column x = 0 and row y = 0 are reachable only by sliding along them
    for y in range(Q):
        iv = fs.vert[0][y]
        if iv is None or iv[0] > 0.0:
            break
        left[0][y] = iv
        if iv[1] < 1.0:
            break
    for x in range(P):
        iv = fs.horiz[x][0]
        if iv is None or iv[0] > 0.0:
            break
        bottom[x][0] = iv
        if iv[1] < 1.0:
            break
    for x in range(P):
        for y in range(Q):
            L, B = left[x][y], bottom[x][y]
            right, top = fs.vert[x + 1][y], fs.horiz[x][y + 1]
            if B is not None:
                left[x + 1][y] = right
            elif L is not None:
                left[x + 1][y] = intersect(right, (L[0], 1.0))
            if L is not None:
                bottom[x][y + 1] = top
            elif B is not None:
                bottom[x][y + 1] = intersect(top, (B[0], 1.0))
    R, T = left[P][Q - 1], bottom[P - 1][Q]
    ok = fs.end_free and ((R is not None and R[1] >= 1.0) or (T is not None and T[1] >= 1.0))
    return ReachabilityTable(left, bottom, ok)


def _backtrack(table: ReachabilityTable, P: int, Q: int) -> list[tuple[float, float]]:
    """Walk back from ``(P, Q)`` picking reachable entry points below/left of the current point."""
    pts = [(float(P), float(Q))]
    x, y = P - 1, Q - 1
    cx, cy = float(P), float(Q)
    while True:
        L, B = table.left[x][y], table.bottom[x][y]
        cand = None
        if L is not None:
            s = min(L[1], cy - y)
            if s >= L[0] - 1e-12:
                cand = ("L", max(s, L[0]))
        if cand is None and B is not None:
            s = min(B[1], cx - x)
            if s >= B[0] - 1e-12:
                cand = ("B", max(s, B[0]))
        if cand is None:
            raise RuntimeError("inconsistent reachability table")
        side, s = cand
        if side == "L":
            cx, cy = float(x), y + s
            pts.append((cx, cy))
            if x == 0:
                break
            x -= 1
        else:
            cx, cy = x + s, float(y)
            pts.append((cx, cy))
            if y == 0:
                break
            y -= 1
    pts.append((0.0, 0.0))
    pts.reverse()
    # clamp tiny non-monotone float noise
    out = [pts[0]]
    for px, py in pts[1:]:
        out.append((max(px, out[-1][0]), max(py, out[-1][1])))
    return out


def decide_ic(a: QuadMesh, b: QuadMesh, eps: float, norm=Norm.L2, slack: float = 0.5 * ETA):
    """Decide whether a constant positional matching within ``eps`` exists.

    Returns ``(accepted, witness)``; the witness is a bimonotone path through
    the free space whose exact distance is at most ``eps + slack``.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    _check_pair(a, b)
    fs = FreeSpace2D.build(a, b, eps + slack, norm)
    table = propagate(fs)
    if not table.accepted:
        return False, None
    path = MonotonePath(_backtrack(table, a.P, b.P))
    return True, MatchingWitness("constant", path, meta={"eps": eps})


def _upper_bound(a: QuadMesh, b: QuadMesh, norm: Norm) -> float:
    if a.P == b.P:
        return frechet_identity(a, b, norm)[0]
    # every point pair of a layer lies within the largest vertex-pair distance
    d = norm(a.vertices[:, :, None, :] - b.vertices[:, None, :, :])
    return float(d.max())


def _pair_roots(d0, d1, e0, e1, norm: Norm):
    """Parameters ``s`` in ``[0, 1]`` where ``||d0 + s d1|| = ||e0 + s e1||``."""
    out = []
    if norm is Norm.L2:
        qa = d1 @ d1 - e1 @ e1
        qb = 2 * (d0 @ d1 - e0 @ e1)
        qc = d0 @ d0 - e0 @ e0
        if abs(qa) < 1e-15:
            if abs(qb) > 1e-15:
                out.append(-qc / qb)
        else:
            disc = qb * qb - 4 * qa * qc
            if disc >= 0:
                r = math.sqrt(disc)
                out += [(-qb - r) / (2 * qa), (-qb + r) / (2 * qa)]
    else:
        # both sides are maxima of |linear| pieces; try every piece pairing
        for k, l in itertools.product(range(len(d0)), repeat=2):
            for sign in (1.0, -1.0):
                den = d1[k] - sign * e1[l]
                if den != 0:
                    out.append((sign * e0[l] - d0[k]) / den)
    return [s for s in out if 0.0 <= s <= 1.0]


def _segment_minimum(d0, d1, norm: Norm) -> float:
    from .geometry import min_on_segment

    return min_on_segment(d0, d1, norm)[0]


def critical_values(a: QuadMesh, b: QuadMesh, norm=Norm.L2) -> np.ndarray:
    """Candidate distances at which the free-space combinatorics can change.

    For every boundary line (a column or row of the free space) the position
    of a boundary-interval endpoint is described by one function per
    ``(grid point, timestamp)``; candidates are vertex distances, minima of
    those functions and values where two of them coincide.
    """
    norm = Norm.parse(norm)
    if norm is Norm.L1:
        raise ValueError("exact critical values are implemented for L2 and Linf only")
    _check_pair(a, b)
    cands = set()
    V, W = a.vertices, b.vertices
    d = norm(V[:, :, None, :] - W[:, None, :, :])
    cands.update(np.unique(d).tolist())

    def families():
        # vertical boundaries in row y: point a(x, t) against segment b(y..y+1, t)
        for y in range(b.P):
            yield [(V[t, x] - W[t, y], W[t, y] - W[t, y + 1]) for x in range(a.P + 1) for t in range(a.T + 1)]
        for x in range(a.P):
            yield [(V[t, x] - W[t, y], V[t, x + 1] - V[t, x]) for y in range(b.P + 1) for t in range(a.T + 1)]

    for funcs in families():
        for d0, d1 in funcs:
            cands.add(_segment_minimum(d0, d1, norm))
        for (d0, d1), (e0, e1) in itertools.combinations(funcs, 2):
            for s in _pair_roots(d0, d1, e0, e1, norm):
                u, v = norm(d0 + s * d1), norm(e0 + s * e1)
                if abs(u - v) <= 1e-9 * max(1.0, u):
                    cands.add(max(u, v))
    return np.array(sorted(cands))


def compute_ic(a: QuadMesh, b: QuadMesh, norm=Norm.L2, mode: str = "bisect", tol: float = 1e-6) -> float:
    """Constant-matching Frechet distance.

    ``mode="bisect"`` returns a value within ``tol`` of the optimum;
    ``mode="critical"`` returns the smallest accepted candidate from
    :func:`critical_values` (L2 / Linf only).
    """
    norm = Norm.parse(norm)
    _check_pair(a, b)

    def accepts(e):
        return decide_ic(a, b, e, norm)[0]

    if mode == "bisect":
        return bisect_threshold(accepts, 0.0, _upper_bound(a, b, norm), tol)
    if mode != "critical":
        raise ValueError(f"unknown mode {mode!r}")
    cands = critical_values(a, b, norm)
    lo, hi = 0, len(cands) - 1
    if not accepts(cands[hi]):
        raise NumericError("largest critical value rejected", (float(cands[0]), float(cands[hi])))
    while lo < hi:
        mid = (lo + hi) // 2
        if accepts(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])
