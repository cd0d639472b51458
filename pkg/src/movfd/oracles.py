"""Brute-force references for the exact algorithms.

Nothing here reuses the free-space code of the primary modules; everything
works on dense samples of the meshes.  The one exception is
:func:`full_R_reachability`, which is the full-relation mode of the dynamic
module and serves as the comparator for the reduced edge set.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.optimize import minimize_scalar

from .geometry import Norm
from .mesh import MonotonePath, QuadMesh, eval_mesh


@dataclass(frozen=True)
class SamplingPlan:
    resolution: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")

    def rng(self):
        return np.random.default_rng(self.seed)


def lipschitz_bound(*meshes: QuadMesh, norm=Norm.L2) -> float:
    """Largest edge length along either axis; bounds the slope of a mesh per parameter unit."""
    norm = Norm.parse(norm)
    out = 0.0
    for m in meshes:
        V = m.vertices
        if m.P:
            out = max(out, float(norm(np.diff(V, axis=1)).max()))
        if m.T:
            out = max(out, float(norm(np.diff(V, axis=0)).max()))
    return out


def _dense_path(path: MonotonePath, res: int) -> np.ndarray:
    pts = path.points
    out = [pts[:1]]
    for p, q in zip(pts[:-1], pts[1:]):
        k = max(1, int(np.ceil(res * np.max(q - p))))
        s = np.linspace(0, 1, k + 1)[1:, None]
        out.append(p + s * (q - p))
    return np.concatenate(out)


def sampled_sup(a: QuadMesh, b: QuadMesh, witness, plan: SamplingPlan = SamplingPlan(), norm=Norm.L2) -> float:
    """Max distance over matched sample pairs; a lower bound of the witness's sup."""
    norm = Norm.parse(norm)
    pos = _dense_path(witness.position, plan.resolution)
    if witness.time is None:
        ts = np.linspace(0, a.T, plan.resolution * a.T + 1) if a.T else np.zeros(1)
        tim = np.stack([ts, ts], axis=1)
    else:
        tim = _dense_path(witness.time, plan.resolution)
    pa = np.clip(pos[:, 0], 0, a.P)
    pb = np.clip(pos[:, 1], 0, b.P)
    ta = np.clip(tim[:, 0], 0, a.T)
    tb = np.clip(tim[:, 1], 0, b.T)
    A = eval_mesh(a, pa[None, :], ta[:, None])
    B = eval_mesh(b, pb[None, :], tb[:, None])
    return float(norm(A - B).max())


def sampled_identity_sup(a: QuadMesh, b: QuadMesh, res: int = 64, norm=Norm.L2) -> float:
    norm = Norm.parse(norm)
    ps = np.linspace(0, a.P, res * a.P + 1)
    ts = np.linspace(0, a.T, res * a.T + 1) if a.T else np.zeros(1)
    return float(norm(eval_mesh(a, ps[None, :], ts[:, None]) - eval_mesh(b, ps[None, :], ts[:, None])).max())


# constant matchings --------------------------------------------------------------

def _sampled_free_2d(a, b, eps, res, norm):
    xs = np.linspace(0, a.P, res * a.P + 1)
    ys = np.linspace(0, b.P, res * b.P + 1)
    free = np.ones((len(xs), len(ys)), dtype=bool)
    # the difference is affine in t between integer layers, so layers suffice
    for t in range(a.T + 1):
        A = eval_mesh(a, xs, float(t))
        B = eval_mesh(b, ys, float(t))
        free &= norm(A[:, None, :] - B[None, :, :]) <= eps
    return free


def _monotone_reach(free: np.ndarray) -> bool:
    reach = np.zeros_like(free)
    if not free[0, 0]:
        return False
    nx, ny = free.shape
    reach[0, 0] = True
    for j in range(1, ny):
        reach[0, j] = reach[0, j - 1] and free[0, j]
    for i in range(1, nx):
        prev = reach[i - 1]
        cur = np.zeros(ny, dtype=bool)
        cur[0] = prev[0] and free[i, 0]
        diag = np.zeros(ny, dtype=bool)
        diag[1:] = prev[:-1]
        base = (prev | diag) & free[i]
        # sweep along y for upward moves
        run = False
        for j in range(ny):
            run = free[i, j] and (run or base[j])
            cur[j] = run
        reach[i] = cur
    return bool(reach[-1, -1])


def grid_dp_ic(a: QuadMesh, b: QuadMesh, eps: float, plan: SamplingPlan = SamplingPlan(), norm=Norm.L2) -> bool:
    """Monotone reachability on a dense sample of the time-intersected free space.

    Agrees with the exact decision whenever ``|eps - eps*|`` exceeds
    :func:`ic_margin`.
    """
    return _monotone_reach(_sampled_free_2d(a, b, eps, plan.resolution, Norm.parse(norm)))


def ic_margin(a: QuadMesh, b: QuadMesh, plan: SamplingPlan = SamplingPlan(), norm=Norm.L2) -> float:
    return 2.0 * lipschitz_bound(a, b, norm=norm) / plan.resolution


# classic static curves -----------------------------------------------------------

def _segment_sublevel(p, q0, q1, eps, norm, tol=1e-13):
    """``{s in [0,1] : ||p - q(s)|| <= eps}`` for a convex ``s -> ||p - q(s)||``."""
    f = lambda s: float(norm(p - (q0 + s * (q1 - q0))))
    res = minimize_scalar(f, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
    cands = [(f(0.0), 0.0), (f(1.0), 1.0), (float(res.fun), float(res.x))]
    fmin, smin = min(cands)
    if fmin > eps:
        return None

    def cross(lo, hi, inside_lo):
        # bisection between a point inside and one outside
        for _ in range(200):
            if hi - lo <= tol:
                break
            mid = 0.5 * (lo + hi)
            if (f(mid) <= eps) == inside_lo:
                lo = mid
            else:
                hi = mid
        return lo if inside_lo else hi

    left = 0.0 if f(0.0) <= eps else cross(0.0, smin, False)
    right = 1.0 if f(1.0) <= eps else cross(smin, 1.0, True)
    return left, right


def classic_frechet(pa, pb, eps: float, norm=Norm.L2) -> bool:
    """Free-space decision for polylines ``pa`` (n+1 points) and ``pb`` (m+1 points)."""
    norm = Norm.parse(norm)
    pa, pb = np.atleast_2d(np.asarray(pa, float)), np.atleast_2d(np.asarray(pb, float))
    if pa.shape[0] == 1 or pb.shape[0] == 1:
        return bool(norm(pa[:, None, :] - pb[None, :, :]).max() <= eps)
    n, m = len(pa) - 1, len(pb) - 1
    if norm(pa[0] - pb[0]) > eps or norm(pa[-1] - pb[-1]) > eps:
        return False
    # L[i][j]: free part of the left side of cell (i, j): point pa[i] vs segment pb[j..j+1]
    L = [[_segment_sublevel(pa[i], pb[j], pb[j + 1], eps, norm) for j in range(m)] for i in range(n + 1)]
    B = [[_segment_sublevel(pb[j], pa[i], pa[i + 1], eps, norm) for j in range(m + 1)] for i in range(n)]
    LR = [[None] * m for _ in range(n + 1)]
    BR = [[None] * (m + 1) for _ in range(n)]
    for j in range(m):
        if L[0][j] is None or L[0][j][0] > 0 or (j and (LR[0][j - 1] is None or LR[0][j - 1][1] < 1)):
            break
        LR[0][j] = L[0][j]
    for i in range(n):
        if B[i][0] is None or B[i][0][0] > 0 or (i and (BR[i - 1][0] is None or BR[i - 1][0][1] < 1)):
            break
        BR[i][0] = B[i][0]
    for i in range(n):
        for j in range(m):
            lr, br = LR[i][j], BR[i][j]
            right, top = L[i + 1][j], B[i][j + 1]
            if right is not None:
                if br is not None:
                    LR[i + 1][j] = right
                elif lr is not None and max(lr[0], right[0]) <= right[1]:
                    LR[i + 1][j] = (max(lr[0], right[0]), right[1])
            if top is not None:
                if lr is not None:
                    BR[i][j + 1] = top
                elif br is not None and max(br[0], top[0]) <= top[1]:
                    BR[i][j + 1] = (max(br[0], top[0]), top[1])
    r, t = LR[n][m - 1], BR[n - 1][m]
    return bool((r is not None and r[1] >= 1.0) or (t is not None and t[1] >= 1.0))


def classic_frechet_distance(pa, pb, norm=Norm.L2, tol: float = 1e-9) -> float:
    norm = Norm.parse(norm)
    pa, pb = np.atleast_2d(np.asarray(pa, float)), np.atleast_2d(np.asarray(pb, float))
    lo = max(float(norm(pa[0] - pb[0])), float(norm(pa[-1] - pb[-1])))
    hi = float(norm(pa[:, None, :] - pb[None, :, :]).max())
    if classic_frechet(pa, pb, lo, norm):
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if classic_frechet(pa, pb, mid, norm):
            hi = mid
        else:
            lo = mid
    return hi


# dynamic matchings ---------------------------------------------------------------

def full_R_reachability(a: QuadMesh, b: QuadMesh, eps: float, norm=Norm.L2) -> bool:
    """``True`` iff ``u`` is reachable from ``d`` under the full dominance relation (i.e. reject)."""
    from .dynamic import decide_id

    return not decide_id(a, b, eps, norm, graph="full").accepted


def _grid_values(a, b, res, norm):
    xs = np.linspace(0, a.P, res * a.P + 1)
    ys = np.linspace(0, b.P, res * b.P + 1)
    T = max(a.T, 1)
    ts = np.linspace(0, a.T, res * a.T + 1) if a.T else np.zeros(1)
    A = eval_mesh(a, xs[None, :], ts[:, None])  # (t, x, dim)
    B = eval_mesh(b, ys[None, :], ts[:, None])
    vals = norm(A[:, :, None, :] - B[:, None, :, :])  # (t, x, y)
    return np.transpose(vals, (1, 2, 0)), xs, ys, ts


class SampledFreeSpace3D:
    """Free space sampled at ``res`` nodes per unit along x, y and t (``vals[x, y, t]``)."""

    def __init__(self, a: QuadMesh, b: QuadMesh, eps: float, res: int = 16, norm=Norm.L2):
        self.norm = Norm.parse(norm)
        self.res, self.eps = res, eps
        self.P, self.Q, self.T = a.P, b.P, a.T
        self.vals, self.xs, self.ys, self.ts = _grid_values(a, b, res, self.norm)
        self.bad = self.vals > eps
        self._labels = {}

    def block_labels(self, g):
        """Label the infeasible samples of the (up to eight) cells around grid point ``g``."""
        if g not in self._labels:
            r = self.res
            x, y, t = g
            sl = tuple(slice(max(0, c - 1) * r, min(n, c + 1) * r + 1)
                       for c, n in zip((x, y, t), (self.P, self.Q, max(self.T, 0))))
            sub = self.bad[sl]
            lab, _ = ndimage.label(sub)
            origin = tuple(s.start for s in sl)
            self._labels[g] = (lab, origin)
        return self._labels[g]

    def obstacle_contains(self, g, node) -> bool:
        lab, origin = self.block_labels(g)
        gi = tuple(c * self.res - o for c, o in zip(g, origin))
        if lab[gi] == 0:
            return False
        ni = tuple(n - o for n, o in zip(node, origin))
        if any(i < 0 or i >= s for i, s in zip(ni, lab.shape)):
            return False
        return bool(lab[ni] == lab[gi])


def dynamic_margin(a: QuadMesh, b: QuadMesh, res: int, norm=Norm.L2) -> float:
    return 2.0 * lipschitz_bound(a, b, norm=norm) / res


def sampled_cell_labels(dc, eps, norm, res: int = 32) -> np.ndarray:
    """Connected-component labels of the infeasible nodes of a ``(res+1)^3`` cell sample."""
    from .dynamic.cells import trilinear

    g = np.linspace(0.0, 1.0, res + 1)
    XI, ETA, TH = np.meshgrid(g, g, g, indexing="ij")
    return ndimage.label(Norm.parse(norm)(trilinear(dc, XI, ETA, TH)) > eps)[0]


def cell_lipschitz(dc, norm=Norm.L2) -> float:
    """Bound on the change of the cell's difference map per unit of any local coordinate."""
    norm = Norm.parse(norm)
    return float(max(norm(np.diff(dc, axis=ax)).max() for ax in range(3)))


def sampled_cell_membership(dc, eps, norm, point, res: int = 32, labels=None):
    """Cell corners sharing a sampled component with ``point`` (local coordinates).

    The point is attached to the nearest infeasible node of its voxel; ``None``
    if the voxel has no infeasible node.
    """
    from .dynamic.cells import CORNERS

    lab = sampled_cell_labels(dc, eps, norm, res) if labels is None else labels
    point = np.asarray(point, dtype=float)
    idx = np.clip(np.floor(point * res).astype(int), 0, res - 1)
    best, label = np.inf, 0
    for off in np.ndindex(2, 2, 2):
        n = tuple(idx + np.array(off))
        if lab[n]:
            d = np.linalg.norm(np.array(n) / res - point)
            if d < best:
                best, label = d, lab[n]
    if not label:
        return None
    return frozenset(c for c in CORNERS if lab[c[0] * res, c[1] * res, c[2] * res] == label)


def random_dynamic_search(a: QuadMesh, b: QuadMesh, trials: int = 100_000, seed: int = 0, res: int = 4,
                          batch: int = 1000, norm=Norm.L2) -> float:
    """Smallest sampled sup over random discretized dynamic matchings.

    A candidate assigns a monotone map ``pi_t`` to every sampled time, built as
    a random base map plus a slowly varying per-time perturbation.
    """
    norm = Norm.parse(norm)
    rng = np.random.default_rng(seed)
    xs = np.linspace(0, a.P, res * a.P + 1)
    ts = np.linspace(0, a.T, res * a.T + 1) if a.T else np.zeros(1)
    A = eval_mesh(a, xs[None, :], ts[:, None])
    best, done = np.inf, 0
    nx, nt = len(xs), len(ts)
    while done < trials:
        cnt = min(batch, trials - done)
        steps = rng.random((cnt, 1, nx - 1)) ** 2 + 1e-3
        drift = np.cumsum(rng.normal(0, 0.3, (cnt, nt, nx - 1)), axis=1)
        w = steps * np.exp(drift)
        cum = np.concatenate([np.zeros((cnt, nt, 1)), np.cumsum(w, axis=2)], axis=2)
        pis = cum / cum[..., -1:] * b.P
        Bv = eval_mesh(b, pis, np.broadcast_to(ts[None, :, None], pis.shape))
        sup = norm(Bv - A[None]).reshape(cnt, -1).max(axis=1)
        best = min(best, float(sup.min()))
        done += cnt
    return best


def sampled_obstacle_graph_blocked(a: QuadMesh, b: QuadMesh, eps: float, res: int = 8, norm=Norm.L2) -> bool:
    """``True`` iff ``d`` reaches ``u`` through sampled obstacles (i.e. no dynamic matching).

    Obstacles are the labelled sample sets of :class:`SampledFreeSpace3D`;
    ``g -> h`` when the sets share or neighbour a node, or when at some
    sampled time a node of ``h`` lies weakly right of and below a node of ``g``.
    """
    sf = SampledFreeSpace3D(a, b, eps, res, norm)
    P, Q, T = a.P, b.P, a.T
    nodes = {}
    for g in itertools.product(range(P + 1), range(Q + 1), range(T + 1)):
        lab, origin = sf.block_labels(g)
        gi = tuple(c * res - o for c, o in zip(g, origin))
        if lab[gi] == 0:
            continue
        mask = np.zeros(sf.bad.shape, dtype=bool)
        sl = tuple(slice(o, o + s) for o, s in zip(origin, lab.shape))
        mask[sl] = lab == lab[gi]
        nodes[g] = mask
    grown = {g: ndimage.binary_dilation(m) for g, m in nodes.items()}
    # closure[x, y, t]: some node of the set has x' <= x and y' >= y at time t
    closure = {g: np.flip(np.logical_or.accumulate(np.flip(np.logical_or.accumulate(m, axis=0), axis=1), axis=1),
                          axis=1) for g, m in nodes.items()}
    adj = {g: [] for g in nodes}
    keys = list(nodes)
    for g in keys:
        for h in keys:
            if g != h and (np.any(grown[g] & nodes[h]) or np.any(closure[g] & nodes[h])):
                adj[g].append(h)
    starts = [g for g, m in nodes.items() if m[:, 0, :].any() or m[-1, :, :].any()]
    goals = {g for g, m in nodes.items() if m[0, :, :].any() or m[:, -1, :].any()}
    seen, stack = set(starts), list(starts)
    while stack:
        g = stack.pop()
        if g in goals:
            return True
        for h in adj[g]:
            if h not in seen:
                seen.add(h)
                stack.append(h)
    return False
