"""Explicit matchings with a verified supremum distance."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Norm
from .mesh import MonotonePath, QuadMesh, Reparameterization


@dataclass
class MatchingWitness:
    """A matching ``(p, t) -> (pos(p), time(t))`` given as monotone paths.

    ``kind`` is one of ``identity``, ``pl``, ``constant`` or ``gadget``.
    ``bound`` is the exact supremum distance once :meth:`verify` has run.
    """

    kind: str
    position: MonotonePath
    time: MonotonePath | None = None
    bound: float | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_reparams(cls, kind, pi: Reparameterization, tau: Reparameterization | None = None, **meta):
        return cls(kind, MonotonePath.from_reparam(pi),
                   None if tau is None else MonotonePath.from_reparam(tau), meta=meta)

    def verify(self, a: QuadMesh, b: QuadMesh, norm=Norm.L2) -> float:
        from .identity import frechet_pl

        time = self.time
        if time is None:
            if a.T != b.T:
                raise ValueError("witness without time matching needs equal T")
            time = MonotonePath([[0, 0], [a.T, a.T]]) if a.T else MonotonePath([[0, 0]])
        self.bound = frechet_pl(a, b, self.position, time, Norm.parse(norm))
        return self.bound

    def sample(self, s):
        """Map common path parameter ``s`` in ``[0, 1]`` to ``(p_a, p_b)``."""
        pts = self.position.points
        seg = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pts, axis=0).T))])
        total = seg[-1] if seg[-1] > 0 else 1.0
        u = np.asarray(s, dtype=float) * total
        return np.interp(u, seg, pts[:, 0]), np.interp(u, seg, pts[:, 1])

    def to_json(self) -> dict:
        out = {"kind": self.kind, "position": self.position.points.tolist(), "bound": self.bound}
        if self.time is not None:
            out["time"] = self.time.points.tolist()
        return out
