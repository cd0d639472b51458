"""Deterministic SVG renderings of free-space diagrams.

Free samples are white, blocked ones grey; the cell grid is drawn on top and
an optional witness path in red.  Output depends only on the inputs: fixed
palette, fixed scale and fixed number formatting.
"""
from __future__ import annotations

import numpy as np

from .geometry import Norm
from .mesh import QuadMesh, eval_mesh

PALETTE = {"free": "#ffffff", "blocked": "#9e9e9e", "grid": "#303030", "path": "#d62728", "frame": "#000000"}
CELL_PX = 64


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


def _render(free: np.ndarray, P: int, Q: int, path=None, title: str = "") -> str:
    """``free[i, j]`` covers x-sample ``i`` and y-sample ``j``; y grows upwards."""
    nx, ny = free.shape
    W, H = P * CELL_PX, Q * CELL_PX
    sx, sy = W / nx, H / ny
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W + 20}" height="{H + 20}" '
           f'viewBox="-10 -10 {W + 20} {H + 20}">']
    if title:
        out.append(f"<title>{title}</title>")
    out.append(f'<rect x="0" y="0" width="{W}" height="{H}" fill="{PALETTE["blocked"]}"/>')
    for j in range(ny):
        y = H - (j + 1) * sy
        i = 0
        while i < nx:
            if not free[i, j]:
                i += 1
                continue
            k = i
            while k < nx and free[k, j]:
                k += 1
            out.append(f'<rect x="{_fmt(i * sx)}" y="{_fmt(y)}" width="{_fmt((k - i) * sx)}" '
                       f'height="{_fmt(sy)}" fill="{PALETTE["free"]}"/>')
            i = k
    for x in range(P + 1):
        out.append(f'<line x1="{x * CELL_PX}" y1="0" x2="{x * CELL_PX}" y2="{H}" '
                   f'stroke="{PALETTE["grid"]}" stroke-width="1"/>')
    for y in range(Q + 1):
        out.append(f'<line x1="0" y1="{y * CELL_PX}" x2="{W}" y2="{y * CELL_PX}" '
                   f'stroke="{PALETTE["grid"]}" stroke-width="1"/>')
    if path is not None:
        pts = " ".join(f"{_fmt(px * CELL_PX)},{_fmt(H - py * CELL_PX)}" for px, py in path)
        out.append(f'<polyline points="{pts}" fill="none" stroke="{PALETTE["path"]}" stroke-width="2"/>')
    out.append(f'<rect x="0" y="0" width="{W}" height="{H}" fill="none" stroke="{PALETTE["frame"]}" '
               f'stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _centres(n: int, res: int) -> np.ndarray:
    return (np.arange(n * res) + 0.5) / res


def ic_svg(a: QuadMesh, b: QuadMesh, eps: float, norm=Norm.L2, witness=None, res: int = 16) -> str:
    """Time-intersected 2D free space, optionally with the witness path."""
    norm = Norm.parse(norm)
    xs, ys = _centres(a.P, res), _centres(b.P, res)
    free = np.ones((len(xs), len(ys)), dtype=bool)
    for t in range(a.T + 1):
        A = eval_mesh(a, xs, float(t))
        B = eval_mesh(b, ys, float(t))
        free &= norm(A[:, None, :] - B[None, :, :]) <= eps
    path = None if witness is None else witness.position.points
    return _render(free, a.P, b.P, path, f"constant free space eps={_fmt(eps)}")


def id_slice_svg(a: QuadMesh, b: QuadMesh, eps: float, t: float, norm=Norm.L2, res: int = 16) -> str:
    """Slice of the 3D free space at time ``t``."""
    norm = Norm.parse(norm)
    xs, ys = _centres(a.P, res), _centres(b.P, res)
    A = eval_mesh(a, xs, float(t))
    B = eval_mesh(b, ys, float(t))
    free = norm(A[:, None, :] - B[None, :, :]) <= eps
    return _render(free, a.P, b.P, None, f"dynamic free space slice t={_fmt(t)} eps={_fmt(eps)}")
