"""Norms and exact sublevel computations along affine segments.

Everything in the free-space code eventually asks one of two questions about
an affine map ``s -> d0 + s * d1`` on ``[0, 1]``: where is its norm at most
``eps``, and where is its norm smallest.  Both are answered exactly here for
the L1, L2 and L-infinity norms.
"""
from __future__ import annotations

import enum
import itertools
import math

import numpy as np

ETA = 1e-9


class Norm(str, enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @classmethod
    def parse(cls, value: "Norm | str") -> "Norm":
        if isinstance(value, Norm):
            return value
        key = str(value).lower().replace("∞", "inf")
        aliases = {"l1": cls.L1, "l2": cls.L2, "linf": cls.LINF, "inf": cls.LINF, "max": cls.LINF}
        if key not in aliases:
            raise ValueError(f"unknown norm {value!r}")
        return aliases[key]

    def __call__(self, v) -> np.ndarray | float:
        """Norm along the last axis."""
        v = np.asarray(v, dtype=float)
        if self is Norm.L2:
            out = np.sqrt(np.sum(v * v, axis=-1))
        elif self is Norm.L1:
            out = np.sum(np.abs(v), axis=-1)
        else:
            out = np.max(np.abs(v), axis=-1) if v.shape[-1] else np.zeros(v.shape[:-1])
        return float(out) if np.ndim(out) == 0 else out


def _clip_unit(lo: float, hi: float):
    lo, hi = max(lo, 0.0), min(hi, 1.0)
    if lo > hi:
        return None
    return (lo, hi)


def _l1_breakpoints(d0, d1):
    pts = [0.0, 1.0]
    for a, b in zip(d0, d1):
        if b != 0.0:
            z = -a / b
            if 0.0 < z < 1.0:
                pts.append(z)
    return sorted(set(pts))


def _linf_breakpoints(d0, d1):
    # kinks of max_k |a_k + s b_k|: zeros of each term and pairwise crossings
    pts = set(_l1_breakpoints(d0, d1))
    n = len(d0)
    for k in range(n):
        for l in range(k + 1, n):
            for sign in (1.0, -1.0):
                db = d1[k] - sign * d1[l]
                if db != 0.0:
                    z = (sign * d0[l] - d0[k]) / db
                    if 0.0 < z < 1.0:
                        pts.add(z)
    return sorted(pts)


def min_on_segment(d0, d1, norm: Norm) -> tuple[float, float]:
    """Return ``(min value, argmin s)`` of ``||d0 + s d1||`` over ``s in [0, 1]``."""
    d0 = np.asarray(d0, dtype=float)
    d1 = np.asarray(d1, dtype=float)
    if norm is Norm.L2:
        aa = float(d1 @ d1)
        s = 0.0 if aa == 0.0 else min(1.0, max(0.0, -float(d0 @ d1) / aa))
        return float(np.linalg.norm(d0 + s * d1)), s
    pts = _l1_breakpoints(d0, d1) if norm is Norm.L1 else _linf_breakpoints(d0, d1)
    vals = [norm(d0 + s * d1) for s in pts]
    i = int(np.argmin(vals))
    return float(vals[i]), pts[i]


def min_on_segments(d0, d1, norm: Norm) -> np.ndarray:
    """Row-wise :func:`min_on_segment` values for stacked ``d0, d1`` of shape ``(n, dim)``."""
    d0 = np.asarray(d0, dtype=float)
    d1 = np.asarray(d1, dtype=float)
    if norm is Norm.L2:
        aa = np.einsum("ij,ij->i", d1, d1)
        ab = np.einsum("ij,ij->i", d0, d1)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(aa > 0.0, np.clip(-ab / aa, 0.0, 1.0), 0.0)
        return norm(d0 + s[:, None] * d1)
    # candidates are the kinks of the convex piecewise linear map, plus both ends
    with np.errstate(divide="ignore", invalid="ignore"):
        cands = [np.zeros(len(d0)), np.ones(len(d0))]
        cands += list((-d0 / d1).T)
        if norm is Norm.LINF:
            for k, l in itertools.combinations(range(d0.shape[1]), 2):
                for sign in (1.0, -1.0):
                    cands.append((sign * d0[:, l] - d0[:, k]) / (d1[:, k] - sign * d1[:, l]))
    S = np.clip(np.nan_to_num(np.stack(cands, axis=1), nan=0.0, posinf=0.0, neginf=0.0), 0.0, 1.0)
    return norm(d0[:, None, :] + S[..., None] * d1[:, None, :]).min(axis=1)


def sublevel_interval(d0, d1, eps: float, norm: Norm):
    """Closed interval ``{s in [0,1] : ||d0 + s d1|| <= eps}`` or ``None`` if empty.

    Convexity of the norm makes the set an interval.
    """
    d0 = np.asarray(d0, dtype=float)
    d1 = np.asarray(d1, dtype=float)
    if eps < 0:
        return None
    if norm is Norm.L2:
        a = float(d1 @ d1)
        b = float(d0 @ d1)
        c = float(d0 @ d0) - eps * eps
        if a <= 1e-300:
            return (0.0, 1.0) if c <= 0.0 else None
        disc = b * b - a * c
        if disc < 0.0:
            return None
        r = math.sqrt(disc)
        # stable roots of a s^2 + 2 b s + c
        q = -(b + math.copysign(r, b)) if b != 0.0 else r
        if q == 0.0:
            return _clip_unit(0.0, 0.0)
        s1, s2 = q / a, c / q
        return _clip_unit(min(s1, s2), max(s1, s2))
    if norm is Norm.LINF:
        lo, hi = 0.0, 1.0
        for a, b in zip(d0, d1):
            if b == 0.0:
                if abs(a) > eps:
                    return None
                continue
            u, v = (-eps - a) / b, (eps - a) / b
            if u > v:
                u, v = v, u
            lo, hi = max(lo, u), min(hi, v)
            if lo > hi:
                return None
        return (lo, hi)
    # L1: convex piecewise linear, exact walk over the kinks
    pts = _l1_breakpoints(d0, d1)
    vals = [norm(d0 + s * d1) for s in pts]
    i = int(np.argmin(vals))
    if vals[i] > eps:
        return None

    def cross(j, k):
        # point between pts[j] (<= eps) and pts[k] (> eps) where the value is eps
        return pts[j] + (eps - vals[j]) * (pts[k] - pts[j]) / (vals[k] - vals[j])

    lo = pts[0]
    for j in range(i, 0, -1):
        if vals[j - 1] > eps:
            lo = cross(j, j - 1)
            break
    hi = pts[-1]
    for j in range(i, len(pts) - 1):
        if vals[j + 1] > eps:
            hi = cross(j, j + 1)
            break
    return (lo, hi)


def intersect(a, b):
    if a is None or b is None:
        return None
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    return (lo, hi) if lo <= hi else None


class NumericError(RuntimeError):
    """Optimization did not converge; ``bracket`` holds the best known interval."""

    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(f"{message} (bracket {bracket})")
        self.bracket = bracket


def bisect_threshold(accepts, lo: float, hi: float, tol: float, max_iter: int = 200) -> float:
    """Smallest value accepted by the monotone predicate ``accepts``, to within ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not accepts(hi):
        raise NumericError("upper bracket rejected", (lo, hi))
    if accepts(lo):
        return lo
    for _ in range(max_iter):
        if hi - lo <= tol:
            return hi
        mid = 0.5 * (lo + hi)
        if accepts(mid):
            hi = mid
        else:
            lo = mid
    raise NumericError("bisection did not converge", (lo, hi))
