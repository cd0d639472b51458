"""Per-cell free-space features for synchronous dynamic matchings.

A cell of the 3D free space is the unit cube ``[x, x+1] x [y, y+1] x [l, l+1]``
in local coordinates ``(xi, eta, theta)``.  The difference
``D = A(x + xi, l + theta) - B(y + eta, l + theta)`` is affine in ``(xi, eta)``
for fixed ``theta`` and affine in ``theta`` for fixed ``(xi, eta)``, so it is
the trilinear interpolation of its eight corner values.

Every connected component of the infeasible part of a cell contains a cell
corner.  Components are found by tracking, slice by slice, which of the four
vertical (t-)edges are joined along a fully infeasible side of the slice
square.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..geometry import Norm, min_on_segment, min_on_segments, sublevel_interval

CORNERS = [(i, j, k) for k in (0, 1) for j in (0, 1) for i in (0, 1)]
# samples per refinement round of the side-gap maximum
ZOOM_SAMPLES = 9
SLICE_CORNERS = [(0, 0), (1, 0), (1, 1), (0, 1)]
# slice-square sides as (start corner, end corner)
SIDES = [((0, 0), (1, 0)), ((1, 0), (1, 1)), ((0, 1), (1, 1)), ((0, 0), (0, 1))]


class _UnionFind:
    def __init__(self, items=()):
        self.parent = {x: x for x in items}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # deterministic representative
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def groups(self):
        out = {}
        for x in sorted(self.parent):
            out.setdefault(self.find(x), []).append(x)
        return [frozenset(v) for _, v in sorted(out.items())]


def corner_differences(a, b, x: int, y: int, l: int) -> np.ndarray:
    """``Dc[i, j, k] = A[l + k, x + i] - B[l + k, y + j]``."""
    A, B = a.vertices, b.vertices
    dc = np.empty((2, 2, 2, a.dim))
    for i, j, k in CORNERS:
        dc[i, j, k] = A[l + k, x + i] - B[l + k, y + j]
    return dc


def trilinear(dc: np.ndarray, xi, eta, theta) -> np.ndarray:
    xi, eta, theta = (np.asarray(v, dtype=float)[..., None] for v in (xi, eta, theta))
    out = 0.0
    for i, j, k in CORNERS:
        w = (xi if i else 1 - xi) * (eta if j else 1 - eta) * (theta if k else 1 - theta)
        out = out + w * dc[i, j, k]
    return out


@dataclass
class SliceComponent:
    """Infeasible region of one slice square attached to some t-edges.

    ``labels`` are cell corners ``(i, j, k)`` naming the t-edge pieces it
    contains; ``boxes`` are ``(xi0, xi1, eta0, eta1)`` pieces of its boundary
    arc and ``open`` flags which of those four ends are not attained.
    """

    labels: frozenset
    boxes: list
    corners: list
    open: list = field(default_factory=list)


@dataclass
class CellFeatures:
    x: int
    y: int
    l: int
    dc: np.ndarray
    eps: float
    norm: Norm
    tedges: dict = field(default_factory=dict)
    xedges: dict = field(default_factory=dict)
    yedges: dict = field(default_factory=dict)
    corner_free: dict = field(default_factory=dict)
    components: list = field(default_factory=list)
    slack: float = np.inf
    side_samples: int = 9

    @classmethod
    def build(cls, dc, eps, norm, x=0, y=0, l=0, connectivity="exact"):
        cf = cls(x, y, l, np.asarray(dc, dtype=float), float(eps), Norm.parse(norm))
        d = cf.dc
        for i, j in SLICE_CORNERS:
            cf.tedges[(i, j)] = sublevel_interval(d[i, j, 0], d[i, j, 1] - d[i, j, 0], eps, cf.norm)
        for j, k in itertools.product((0, 1), repeat=2):
            cf.xedges[(j, k)] = sublevel_interval(d[0, j, k], d[1, j, k] - d[0, j, k], eps, cf.norm)
        for i, k in itertools.product((0, 1), repeat=2):
            cf.yedges[(i, k)] = sublevel_interval(d[i, 0, k], d[i, 1, k] - d[i, 0, k], eps, cf.norm)
        for c in CORNERS:
            val = cf.norm(d[c])
            # read off the t-edge interval so corners and pieces never disagree at ties
            iv = cf.tedges[c[:2]]
            cf.corner_free[c] = iv is not None and (iv[0] <= 0.0 if c[2] == 0 else iv[1] >= 1.0)
            cf.slack = min(cf.slack, abs(val - eps))
        if connectivity == "exact":
            cf.components = cf._slice_arc_components()
        else:
            res = int(str(connectivity).split(":")[1]) if ":" in str(connectivity) else 16
            cf.components = sampled_components(d, eps, cf.norm, res)
        return cf

    # t-edge pieces -------------------------------------------------------
    def piece_label(self, i: int, j: int, theta: float):
        """Corner naming the infeasible piece of t-edge ``(i, j)`` at ``theta`` (``None`` if free)."""
        iv = self.tedges[(i, j)]
        if iv is None:
            return (i, j, 0)
        if theta < iv[0]:
            return (i, j, 0)
        if theta > iv[1]:
            return (i, j, 1)
        return None

    def corner_trange(self, c) -> tuple[float, float]:
        """Local theta-range of the t-edge piece that contains corner ``c``."""
        i, j, k = c
        iv = self.tedges[(i, j)]
        if iv is None:
            return (0.0, 1.0)
        return (0.0, iv[0]) if k == 0 else (iv[1], 1.0)

    def corner_topen(self, c) -> tuple[bool, bool]:
        """Whether the ends of :meth:`corner_trange` are excluded (they touch free space)."""
        i, j, k = c
        if self.tedges[(i, j)] is None:
            return (False, False)
        return (False, True) if k == 0 else (True, False)

    def slice_point(self, corner, theta):
        i, j = corner
        return (1 - theta) * self.dc[i, j, 0] + theta * self.dc[i, j, 1]

    def side_gap(self, side, theta) -> float:
        """Minimum norm along a slice side at ``theta``."""
        p = self.slice_point(side[0], theta)
        q = self.slice_point(side[1], theta)
        return min_on_segment(p, q - p, self.norm)[0]

    def _side_gaps(self, side, ts):
        ts = np.asarray(ts, dtype=float)[:, None]
        (i0, j0), (i1, j1) = side
        d = self.dc
        p = (1 - ts) * d[i0, j0, 0] + ts * d[i0, j0, 1]
        q = (1 - ts) * d[i1, j1, 0] + ts * d[i1, j1, 1]
        return min_on_segments(p, q - p, self.norm)

    def _max_side_gap(self, side, lo, hi) -> float:
        ts = np.linspace(lo, hi, self.side_samples)
        vals = self._side_gaps(side, ts)
        best = float(vals.max())
        # zoom in around the best sample until the bracket is negligible or eps is beaten
        while ts[-1] - ts[0] > 1e-10 and best <= self.eps:
            k = int(np.argmax(vals))
            a, b = ts[max(k - 1, 0)], ts[min(k + 1, len(ts) - 1)]
            ts = np.linspace(a, b, ZOOM_SAMPLES)
            vals = self._side_gaps(side, ts)
            best = max(best, float(vals.max()))
        return best

    def _slice_arc_components(self):
        infeasible = [c for c in CORNERS if not self.corner_free[c]]
        uf = _UnionFind(infeasible)
        for i, j in SLICE_CORNERS:
            if self.tedges[(i, j)] is None:
                uf.union((i, j, 0), (i, j, 1))
        for side in SIDES:
            ca, cb = side
            events = {0.0, 1.0}
            for c in side:
                iv = self.tedges[c]
                if iv is not None:
                    events.update(v for v in iv if 0.0 < v < 1.0)
            events = sorted(events)
            for lo, hi in zip(events[:-1], events[1:]):
                if hi - lo <= 1e-12:
                    continue
                mid = 0.5 * (lo + hi)
                la, lb = self.piece_label(*ca, mid), self.piece_label(*cb, mid)
                if la is None or lb is None or la not in uf.parent or lb not in uf.parent:
                    continue
                gap = self._max_side_gap(side, lo, hi)
                self.slack = min(self.slack, abs(gap - self.eps))
                if gap > self.eps:
                    uf.union(la, lb)
        return uf.groups()

    def component_index(self, label):
        for n, comp in enumerate(self.components):
            if label in comp:
                return n
        return None

    # slices ----------------------------------------------------------------
    def side_interval(self, side, theta):
        p = self.slice_point(side[0], theta)
        q = self.slice_point(side[1], theta)
        return sublevel_interval(p, q - p, self.eps, self.norm)

    def slice(self, theta: float) -> list[SliceComponent]:
        """Infeasible components of the slice square at ``theta``."""
        labels = {c: self.piece_label(*c, theta) for c in SLICE_CORNERS}
        present = [c for c in SLICE_CORNERS if labels[c] is not None]
        uf = _UnionFind(present)
        ivs = {}
        for side in SIDES:
            iv = self.side_interval(side, theta)
            ivs[side] = iv
            if iv is None and side[0] in uf.parent and side[1] in uf.parent:
                uf.union(*side)
        out = []
        for group in uf.groups():
            boxes, opens = [], []
            for c in group:
                boxes.append((c[0], c[0], c[1], c[1]))
                opens.append((False, False, False, False))
                for side in SIDES:
                    if c not in side:
                        continue
                    iv = ivs[side]
                    if iv is None:
                        seg, so = (0.0, 1.0), (False, False)
                    elif c == side[0] and iv[0] > 0.0:
                        seg, so = (0.0, iv[0]), (False, True)
                    elif c == side[1] and iv[1] < 1.0:
                        seg, so = (iv[1], 1.0), (True, False)
                    else:
                        continue
                    # every side runs in increasing coordinate direction
                    (x0, y0), (x1, y1) = side
                    if y0 == y1:
                        boxes.append((seg[0], seg[1], float(y0), float(y0)))
                        opens.append((so[0], so[1], False, False))
                    else:
                        boxes.append((float(x0), float(x0), seg[0], seg[1]))
                        opens.append((False, False, so[0], so[1]))
            out.append(SliceComponent(frozenset(labels[c] for c in group), boxes, sorted(group), opens))
        return out

    def locate(self, xi: float, eta: float, theta: float):
        """Index into ``components`` of the component containing a point, ``None`` if free."""
        p = trilinear(self.dc, xi, eta, theta)
        if self.norm(p) <= self.eps:
            return None
        for sc in self.slice(theta):
            tg = np.array(list(_arc_targets(sc)), dtype=float)
            q = trilinear(self.dc, tg[:, 0], tg[:, 1], theta)
            # a straight infeasible segment to the component's boundary arc
            if np.any(min_on_segments(np.broadcast_to(p, q.shape), q - p, self.norm) > self.eps):
                for lab in sc.labels:
                    idx = self.component_index(lab)
                    if idx is not None:
                        return idx
        return None


def _arc_targets(sc: SliceComponent, per_box: int = 17):
    for c in sc.corners:
        yield c
    for x0, x1, y0, y1 in sc.boxes:
        for s in np.linspace(0.0, 1.0, per_box):
            yield (x0 + s * (x1 - x0), y0 + s * (y1 - y0))


def sampled_components(dc, eps, norm, res: int = 16):
    """Components by labelling a ``(res+1)^3`` sample grid; corners are grid nodes."""
    from scipy import ndimage

    g = np.linspace(0.0, 1.0, res + 1)
    XI, ETA, TH = np.meshgrid(g, g, g, indexing="ij")
    bad = Norm.parse(norm)(trilinear(dc, XI, ETA, TH)) > eps
    lab, _ = ndimage.label(bad)
    groups = {}
    for i, j, k in CORNERS:
        v = lab[i * res, j * res, k * res]
        if v:
            groups.setdefault(v, []).append((i, j, k))
    return [frozenset(v) for _, v in sorted(groups.items(), key=lambda kv: min(kv[1]))]
