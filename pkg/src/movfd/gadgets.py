"""3-SAT gadget instances for asynchronous matching classes.

Each variable contributes one ridge ``X_i`` to ``A`` and two ridges ``F_i``,
``T_i`` (split by a low separator) to ``B``.  A positional matching sends
``X_i`` to the centre of exactly one of them, which fixes the truth value.
Each clause contributes one peak row to ``A`` and three peak rows to ``B``;
the ``k``-th row leaves out the peak on the ridge that the ``k``-th literal
would use, so ``A``'s peak row finds a partner row iff the clause holds.

Elevations (first channel, in isoline units):

========================  =====
background valley          0
separator valley           1
A shoulder                 3
ridge                      4
B peak                     5
clause pulse               6
A peak                     7
========================  =====
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .geometry import Norm
from .mesh import MonotonePath, QuadMesh, eval_mesh
from .witness import MatchingWitness

VALLEY, SEPARATOR, SHOULDER, RIDGE, B_PEAK, PULSE, A_PEAK = 0.0, 1.0, 3.0, 4.0, 5.0, 6.0, 7.0
# A's rows next to a peak row sit two thirds of the way up
Q_FRAC = 2.0 / 3.0
DD_PEAK, DD_SPACER = -1.5, 1.5


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class CnfFormula:
    n: int
    clauses: tuple = ()

    def __post_init__(self):
        if self.n < 0:
            raise FormulaError("variable count must be nonnegative")
        cl = tuple(tuple(int(v) for v in c) for c in self.clauses)
        for c in cl:
            if len(c) != 3:
                raise FormulaError(f"clause {c} does not have exactly 3 literals")
            if any(v == 0 or abs(v) > self.n for v in c):
                raise FormulaError(f"clause {c} references a variable outside 1..{self.n}")
        object.__setattr__(self, "clauses", cl)

    @property
    def m(self) -> int:
        return len(self.clauses)

    @classmethod
    def parse_dimacs(cls, text: str) -> "CnfFormula":
        n = None
        lits, clauses = [], []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("c") or line.startswith("%"):
                continue
            if line.startswith("p"):
                parts = line.split()
                if len(parts) != 4 or parts[1] != "cnf":
                    raise FormulaError(f"bad problem line: {line!r}")
                n = int(parts[2])
                continue
            for tok in line.split():
                v = int(tok)
                if v == 0:
                    clauses.append(lits)
                    lits = []
                else:
                    lits.append(v)
        if lits:
            clauses.append(lits)
        if n is None:
            raise FormulaError("missing 'p cnf' line")
        return cls(n, clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n} {self.m}"]
        lines += [" ".join(str(v) for v in c) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"

    def satisfied_literals(self, assignment, k: int) -> list:
        """Indices of the literals of clause ``k`` made true by ``assignment``."""
        return [j for j, v in enumerate(self.clauses[k]) if bool(assignment[abs(v) - 1]) == (v > 0)]

    def evaluate(self, assignment) -> bool:
        return all(self.satisfied_literals(assignment, k) for k in range(self.m))


def solve_exhaustive(formula: CnfFormula, max_n: int = 20):
    """First satisfying assignment in lexicographic order, or ``None``."""
    if formula.n > max_n:
        raise ValueError(f"exhaustive search limited to n <= {max_n}")
    if formula.m == 0:
        return [False] * formula.n
    n = formula.n
    bits = (np.arange(2 ** n)[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    ok = np.ones(len(bits), dtype=bool)
    for c in formula.clauses:
        cl = np.zeros(len(bits), dtype=bool)
        for v in c:
            col = bits[:, abs(v) - 1]
            cl |= (col == 1) if v > 0 else (col == 0)
        ok &= cl
    hit = np.flatnonzero(ok)
    return None if hit.size == 0 else [bool(x) for x in bits[hit[0]]]


def random_formula(rng, n: int, m: int) -> CnfFormula:
    clauses = []
    for _ in range(m):
        vs = rng.choice(np.arange(1, n + 1), size=3, replace=n < 3)
        signs = rng.choice([-1, 1], size=3)
        clauses.append([int(v * s) for v, s in zip(vs, signs)])
    return CnfFormula(n, clauses)


# layout -----------------------------------------------------------------------

def _var_base(i: int) -> int:
    # column of the valley that precedes variable i (0-based) on both meshes
    return 1 + 4 * i


@dataclass
class GadgetInstance:
    formula: CnfFormula
    kind: str
    a: QuadMesh
    b: QuadMesh
    features: dict = field(default_factory=dict)

    @property
    def norm(self) -> Norm:
        return Norm.LINF if self.kind == "dd" else Norm.L2


def feature_map(formula: CnfFormula) -> dict:
    n, m = formula.n, formula.m
    omitted = []
    for k, c in enumerate(formula.clauses):
        for j, v in enumerate(c):
            base = _var_base(abs(v) - 1)
            omitted.append([6 * k + 1 + 2 * j, base + 1 if v > 0 else base + 3])
    return {
        "n": n, "m": m, "P": 1 + 4 * n, "T_a": 4 * m, "T_b": 6 * m,
        "pulse_column": 0,
        "a_ridges": [_var_base(i) + 2 for i in range(n)],
        "a_shoulders": [[_var_base(i) + 1, _var_base(i) + 3] for i in range(n)],
        "a_valleys": [1] + [_var_base(i) + 4 for i in range(n)],
        "b_false_ridges": [_var_base(i) + 1 for i in range(n)],
        "b_separators": [_var_base(i) + 2 for i in range(n)],
        "b_true_ridges": [_var_base(i) + 3 for i in range(n)],
        "b_valleys": [1] + [_var_base(i) + 4 for i in range(n)],
        "a_peak_rows": [4 * k + 2 for k in range(m)],
        "a_approach_rows": [[4 * k + 1, 4 * k + 3] for k in range(m)],
        "a_spacer_rows": [4 * k for k in range(m + 1)],
        "b_peak_rows": [[6 * k + 1, 6 * k + 3, 6 * k + 5] for k in range(m)],
        "b_spacer_rows": [6 * k for k in range(m + 1)],
        "b_inner_spacer_rows": [[6 * k + 2, 6 * k + 4] for k in range(m)],
        "omitted_peaks": omitted,
        "elevations": {"valley": VALLEY, "separator": SEPARATOR, "a_shoulder": SHOULDER, "ridge": RIDGE,
                       "b_peak": B_PEAK, "pulse": PULSE, "a_peak": A_PEAK},
    }


def _channel_one(formula: CnfFormula):
    n, m = formula.n, formula.m
    P = 1 + 4 * n
    A = np.zeros((4 * m + 1, P + 1))
    B = np.zeros((6 * m + 1, P + 1))
    if m == 0:
        # nothing to encode: flat background
        return A, B
    a_row = np.zeros(P + 1)
    b_row = np.zeros(P + 1)
    for i in range(n):
        c = _var_base(i)
        a_row[c + 1], a_row[c + 2], a_row[c + 3] = SHOULDER, RIDGE, SHOULDER
        b_row[c + 1], b_row[c + 2], b_row[c + 3] = RIDGE, SEPARATOR, RIDGE
    A[:] = a_row
    B[:] = b_row
    ridges_a = [_var_base(i) + 2 for i in range(n)]
    ridges_b = [_var_base(i) + d for i in range(n) for d in (1, 3)]
    for k, clause in enumerate(formula.clauses):
        peak = 4 * k + 2
        A[peak, ridges_a] = A_PEAK
        A[peak, 0] = PULSE
        for r in (peak - 1, peak + 1):
            A[r, ridges_a] = RIDGE + Q_FRAC * (A_PEAK - RIDGE)
            A[r, 0] = Q_FRAC * PULSE
        B[6 * k + 1:6 * k + 6, 0] = PULSE
        for j, v in enumerate(clause):
            row = 6 * k + 1 + 2 * j
            B[row, ridges_b] = B_PEAK
            base = _var_base(abs(v) - 1)
            B[row, base + 1 if v > 0 else base + 3] = RIDGE
    return A, B


def _channel_two(formula: CnfFormula):
    m, P = formula.m, 1 + 4 * formula.n
    A = np.zeros((4 * m + 1, P + 1))
    B = np.zeros((6 * m + 1, P + 1))
    for k in range(m):
        A[4 * k + 2] = DD_PEAK
        B[[6 * k + 1, 6 * k + 3, 6 * k + 5]] = DD_PEAK
        B[[6 * k + 2, 6 * k + 4]] = DD_SPACER
    return A, B


def gadget_cc(formula: CnfFormula) -> GadgetInstance:
    A, B = _channel_one(formula)
    return GadgetInstance(formula, "cc", QuadMesh(A[..., None]), QuadMesh(B[..., None]), feature_map(formula))


def gadget_dd(formula: CnfFormula) -> GadgetInstance:
    """Two-channel instance intended for the maximum norm.

    The second channel pins every peak row of ``A`` to a single peak row of
    ``B``: between two peak rows of ``B`` it rises to ``+1.5`` while ``A``'s
    peak row sits at ``-1.5``.
    """
    A1, B1 = _channel_one(formula)
    A2, B2 = _channel_two(formula)
    return GadgetInstance(formula, "dd", QuadMesh(np.stack([A1, A2], -1)), QuadMesh(np.stack([B1, B2], -1)),
                          feature_map(formula))


def make_gadget(formula: CnfFormula, kind: str) -> GadgetInstance:
    if kind == "cc":
        return gadget_cc(formula)
    if kind == "dd":
        return gadget_dd(formula)
    raise ValueError(f"unknown gadget class {kind!r}")


# witnesses ----------------------------------------------------------------------

def position_path(formula: CnfFormula, assignment) -> MonotonePath:
    pts = [(0.0, 0.0), (1.0, 1.0)]
    for i in range(formula.n):
        a0 = b0 = float(_var_base(i))
        if assignment[i]:
            # X_i onto T_i: wait on the first shoulder while B crosses F_i
            pts += [(a0 + 1, b0 + 0.75), (a0 + 1, b0 + 2 + 2 / 3), (a0 + 2, b0 + 3),
                    (a0 + 3, b0 + 3.25), (a0 + 4, b0 + 4)]
        else:
            pts += [(a0 + 1, b0 + 0.75), (a0 + 2, b0 + 1), (a0 + 3, b0 + 1 + 1 / 3),
                    (a0 + 3, b0 + 3), (a0 + 4, b0 + 4)]
    return MonotonePath(pts)


def selected_rows(formula: CnfFormula, assignment) -> list:
    out = []
    for k in range(formula.m):
        sat = formula.satisfied_literals(assignment, k)
        out.append(6 * k + 1 + 2 * (sat[0] if sat else 0))
    return out


def time_path(formula: CnfFormula, sel) -> MonotonePath:
    pts = [(0.0, 0.0)]
    for k, s in enumerate(sel):
        a, b = 4 * k, 6 * k
        pts += [(a + 1, b + 1), (a + 1, s), (a + 2, s), (a + 3, s), (a + 3, b + 5), (a + 4, b + 6)]
    return MonotonePath(pts)


def witness_matching(inst: GadgetInstance, assignment, norm=None) -> MatchingWitness:
    f = inst.formula
    if len(assignment) != f.n:
        raise ValueError(f"assignment has {len(assignment)} values, formula has {f.n} variables")
    assignment = [bool(v) for v in assignment]
    if f.m == 0:
        pos = MonotonePath([(0.0, 0.0), (float(inst.a.P), float(inst.b.P))])
        tim = MonotonePath([(0.0, 0.0)])
    else:
        pos = position_path(f, assignment)
        tim = time_path(f, selected_rows(f, assignment))
    w = MatchingWitness("gadget", pos, tim, meta={"assignment": assignment, "satisfying": f.evaluate(assignment)})
    w.verify(inst.a, inst.b, inst.norm if norm is None else norm)
    return w


# audit ---------------------------------------------------------------------------

def feature_gap_audit(inst: GadgetInstance) -> dict:
    """Check the distance gaps the reduction relies on directly on the meshes."""
    fm = inst.features
    A, B = inst.a.vertices[..., 0], inst.b.vertices[..., 0]
    checks = {}
    if fm["m"] == 0:
        checks["flat"] = bool(np.all(A == 0) and np.all(B == 0))
        return {"passed": all(checks.values()), "checks": checks}
    omitted = {tuple(x) for x in fm["omitted_peaks"]}
    ridge_b = fm["b_false_ridges"] + fm["b_true_ridges"]
    a_peaks = [A[r, c] for r in fm["a_peak_rows"] for c in fm["a_ridges"]]
    b_peaks = [B[r, c] for rows in fm["b_peak_rows"] for r in rows for c in ridge_b if (r, c) not in omitted]
    b_flat = [B[r, c] for (r, c) in omitted]
    b_flat += [B[r, c] for r in fm["b_spacer_rows"] for c in ridge_b]
    b_flat += [B[r, c] for rows in fm["b_inner_spacer_rows"] for r in rows for c in ridge_b]
    checks["peak_vs_plain_ridge>=3"] = min(a - b for a in a_peaks for b in b_flat) >= 3
    checks["peak_vs_peak<=2"] = max(abs(a - b) for a in a_peaks for b in b_peaks) <= 2
    a_ridge = [A[r, c] for r in fm["a_spacer_rows"] for c in fm["a_ridges"]]
    seps = [B[r, c] for r in range(B.shape[0]) for c in fm["b_separators"]]
    checks["ridge_vs_separator==3"] = all(abs(a - s) == 3 for a in a_ridge for s in seps)
    checks["ridge_vs_ridge<=2"] = max(abs(a - B[r, c]) for a in a_ridge
                                      for r in fm["b_spacer_rows"] for c in ridge_b) <= 2
    a_pulse = [A[r, 0] for r in fm["a_peak_rows"]]
    b_gaps = [B[r, 0] for r in fm["b_spacer_rows"]]
    checks["pulse_misalignment>=3"] = min(abs(a - b) for a in a_pulse for b in b_gaps) >= 3
    b_on = [B[r, 0] for r in range(B.shape[0]) if r % 6]
    checks["pulse_aligned<=2"] = max(abs(a - b) for a in a_pulse for b in b_on) <= 2
    if inst.kind == "dd":
        A2, B2 = inst.a.vertices[..., 1], inst.b.vertices[..., 1]
        inner = [r for rows in fm["b_inner_spacer_rows"] for r in rows]
        checks["dd_peak_vs_inner_spacer>=3"] = bool(
            np.min(np.abs(A2[fm["a_peak_rows"]][:, None, :] - B2[inner][None, :, :])) >= 3) if inner else True
        checks["dd_channel_one_matches_cc"] = bool(
            np.array_equal(inst.a.vertices[..., 0], gadget_cc(inst.formula).a.vertices[..., 0])
            and np.array_equal(inst.b.vertices[..., 0], gadget_cc(inst.formula).b.vertices[..., 0]))
    checks = {k: bool(v) for k, v in checks.items()}
    return {"passed": all(checks.values()), "checks": checks}


# randomized search ---------------------------------------------------------------

def _random_monotone(rng, count, n_pts, end):
    """``count`` random nondecreasing maps sampled at ``n_pts`` equally spaced inputs."""
    u = np.sort(rng.random((count, n_pts - 2)), axis=1) * end
    return np.concatenate([np.zeros((count, 1)), u, np.full((count, 1), float(end))], axis=1)


def _sampled_path(path: MonotonePath, xs):
    pts = path.points
    # strictly increasing first coordinate for interpolation; flats take the upper value
    return np.interp(xs, pts[:, 0], pts[:, 1], right=pts[-1, 1]) if len(pts) > 1 else np.zeros_like(xs)


def random_matching_search(inst: GadgetInstance, trials: int = 100_000, seed: int = 0,
                           res: int = 2, batch: int = 2000, norm=None) -> dict:
    """Smallest sampled sup over random discretized ``(pi, tau)`` pairs.

    Half of the candidates perturb gadget witnesses (random assignment and
    peak-row choice), the rest are uniformly random monotone maps.  Sampled
    sups are lower bounds of the true sups, so ``best >= 3`` is evidence that
    no matching below 3 exists among the candidates.
    """
    norm = Norm.parse(inst.norm if norm is None else norm)
    rng = np.random.default_rng(seed)
    f = inst.formula
    P, Q, Ta, Tb = inst.a.P, inst.b.P, inst.a.T, inst.b.T
    xs = np.linspace(0, P, res * P + 1)
    ts = np.linspace(0, Ta, res * Ta + 1) if Ta else np.zeros(1)
    A = np.asarray(eval_mesh(inst.a, xs[None, :], ts[:, None]))
    best, best_idx, done = np.inf, -1, 0
    while done < trials:
        cnt = min(batch, trials - done)
        half = cnt // 2
        pis = _random_monotone(rng, cnt, len(xs), Q)
        taus = _random_monotone(rng, cnt, len(ts), Tb) if Ta else np.zeros((cnt, 1))
        for r in range(half):
            asg = rng.random(f.n) < 0.5
            sel = [6 * k + 1 + 2 * int(rng.integers(3)) for k in range(f.m)]
            pi = _sampled_path(position_path(f, asg), xs) if f.m else xs * Q / P
            tau = _sampled_path(time_path(f, sel), ts) if f.m else ts
            jit = rng.random() * 0.5
            pis[r] = np.clip(np.maximum.accumulate(pi + rng.normal(0, jit, pi.shape)), 0, Q)
            taus[r] = np.clip(np.maximum.accumulate(tau + rng.normal(0, jit, tau.shape)), 0, Tb)
            pis[r, 0], pis[r, -1], taus[r, 0], taus[r, -1] = 0, Q, 0, Tb
        Bv = np.asarray(eval_mesh(inst.b, pis[:, None, :], taus[:, :, None]))
        sup = norm(Bv - A[None]).reshape(cnt, -1).max(axis=1)
        i = int(np.argmin(sup))
        if sup[i] < best:
            best, best_idx = float(sup[i]), done + i
        done += cnt
    return {"trials": trials, "best": best, "best_index": best_idx, "seed": seed}
