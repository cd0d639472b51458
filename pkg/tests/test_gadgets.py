import itertools

import numpy as np
import pytest

from movfd.gadgets import (A_PEAK, B_PEAK, RIDGE, SEPARATOR, CnfFormula, FormulaError, feature_gap_audit,
                           gadget_cc, gadget_dd, make_gadget, position_path, random_formula,
                           random_matching_search, solve_exhaustive, witness_matching)
from movfd.geometry import Norm
from movfd.mesh import eval_mesh, subdivide, subdivision_coords

EXAMPLE = CnfFormula(4, [[2, -3, -4]])
# x1 alone in every clause, both polarities
UNSAT_1 = CnfFormula(1, [[1, 1, 1], [-1, -1, -1]])


def _satisfiable(rng, n_max=4, m_max=3):
    while True:
        f = random_formula(rng, int(rng.integers(1, n_max + 1)), int(rng.integers(1, m_max + 1)))
        sol = solve_exhaustive(f)
        if sol is not None:
            return f, sol


def test_example_structure():
    inst = gadget_cc(EXAMPLE)
    fm = inst.features
    A, B = inst.a.vertices[..., 0], inst.b.vertices[..., 0]
    assert len(fm["a_ridges"]) == 4
    assert len(fm["b_false_ridges"] + fm["b_true_ridges"]) == 8
    assert np.all(A[:, fm["a_ridges"]] >= RIDGE)
    assert np.all(B[:, fm["b_separators"]] == SEPARATOR)
    peak_row = fm["a_peak_rows"][0]
    assert np.all(A[peak_row, fm["a_ridges"]] == A_PEAK)
    # k-th peak row of B has no peak on F2, T3, T4 respectively
    omitted = [fm["b_false_ridges"][1], fm["b_true_ridges"][2], fm["b_true_ridges"][3]]
    ridges = fm["b_false_ridges"] + fm["b_true_ridges"]
    for row, col in zip(fm["b_peak_rows"][0], omitted):
        assert B[row, col] == RIDGE
        assert all(B[row, c] == B_PEAK for c in ridges if c != col)
    assert sorted(map(tuple, fm["omitted_peaks"])) == sorted(zip(fm["b_peak_rows"][0], omitted))


def test_example_pulses_at_left_column():
    fm = gadget_cc(EXAMPLE).features
    inst = gadget_cc(EXAMPLE)
    assert fm["pulse_column"] == 0
    assert inst.a.vertices[fm["a_peak_rows"][0], 0, 0] > 0
    assert inst.b.vertices[fm["b_spacer_rows"][0], 0, 0] == 0


def test_example_witness():
    sol = solve_exhaustive(EXAMPLE)
    for kind in ("cc", "dd"):
        inst = make_gadget(EXAMPLE, kind)
        w = witness_matching(inst, sol)
        assert w.bound <= 2 + 1e-9
        assert w.meta["satisfying"]


def test_empty_formula_is_flat():
    f = CnfFormula(2, [])
    for kind in ("cc", "dd"):
        inst = make_gadget(f, kind)
        assert np.all(inst.a.vertices == 0) and np.all(inst.b.vertices == 0)
        assert witness_matching(inst, [True, False]).bound == 0.0
        assert feature_gap_audit(inst)["passed"]


def test_dd_channels():
    inst, cc = gadget_dd(EXAMPLE), gadget_cc(EXAMPLE)
    assert np.array_equal(inst.a.vertices[..., 0], cc.a.vertices[..., 0])
    assert np.array_equal(inst.b.vertices[..., 0], cc.b.vertices[..., 0])
    assert inst.norm is Norm.LINF and cc.norm is Norm.L2
    flat = gadget_dd(CnfFormula(3, []))
    assert np.all(flat.a.vertices[..., 1] == 0)


def test_random_satisfiable_witnesses(rng):
    for _ in range(10):
        f, sol = _satisfiable(rng)
        for kind in ("cc", "dd"):
            inst = make_gadget(f, kind)
            assert witness_matching(inst, sol).bound <= 2 + 1e-9
            assert feature_gap_audit(inst)["passed"]


def test_violating_assignment_at_least_three():
    f = CnfFormula(2, [[1, 2, 2], [-1, -2, -2]])
    for asg in itertools.product([False, True], repeat=2):
        bound = witness_matching(gadget_cc(f), list(asg)).bound
        assert (bound <= 2 + 1e-9) == f.evaluate(asg)
        if not f.evaluate(asg):
            assert bound >= 3 - 1e-9
    for asg in ([False], [True]):
        for kind in ("cc", "dd"):
            assert witness_matching(make_gadget(UNSAT_1, kind), asg).bound >= 3 - 1e-9


def test_witness_length_checked():
    with pytest.raises(ValueError):
        witness_matching(gadget_cc(EXAMPLE), [True])


def test_dimacs_roundtrip():
    text = "c example\np cnf 4 1\n2 -3 -4 0\n"
    f = CnfFormula.parse_dimacs(text)
    assert f == EXAMPLE
    assert CnfFormula.parse_dimacs(f.to_dimacs()) == f


@pytest.mark.parametrize("text", ["1 2 3 0\n", "p cnf 3 1\n1 2 0\n", "p cnf 2 1\n1 2 3 0\n", "p dnf 3 1\n1 2 3 0\n"])
def test_dimacs_errors(text):
    with pytest.raises(FormulaError):
        CnfFormula.parse_dimacs(text)


def test_formula_validation():
    with pytest.raises(FormulaError):
        CnfFormula(2, [[1, 0, 2]])
    with pytest.raises(FormulaError):
        CnfFormula(-1)


def test_solve_exhaustive():
    assert solve_exhaustive(UNSAT_1) is None
    sol = solve_exhaustive(EXAMPLE)
    assert EXAMPLE.evaluate(sol)
    with pytest.raises(ValueError):
        solve_exhaustive(CnfFormula(21, []))


def test_audit_detects_broken_schema():
    inst = gadget_cc(EXAMPLE)
    v = inst.a.vertices.copy()
    v[inst.features["a_peak_rows"][0], inst.features["a_ridges"]] = B_PEAK
    broken = type(inst)(inst.formula, inst.kind, type(inst.a)(v), inst.b, inst.features)
    assert not feature_gap_audit(broken)["passed"]


def test_subdivide_at_gadget_breakpoints(rng):
    inst = gadget_cc(EXAMPLE)
    pos = position_path(EXAMPLE, solve_exhaustive(EXAMPLE)).points
    cuts = sorted({float(v) for v in pos[:, 1] if 0 < v < inst.b.P and v != int(v)})
    s = subdivide(inst.b, cuts, [0.5])
    pg, tg = subdivision_coords(inst.b, cuts, [0.5])
    k, l = rng.random(100) * s.P, rng.random(100) * s.T
    p, t = np.interp(k, np.arange(len(pg)), pg), np.interp(l, np.arange(len(tg)), tg)
    assert np.allclose(eval_mesh(s, k, l), eval_mesh(inst.b, p, t), atol=1e-12)


def test_random_search_unsat_small():
    res = random_matching_search(gadget_cc(UNSAT_1), trials=2000, seed=7)
    assert res["trials"] == 2000
    assert res["best"] >= 3 - 1e-6
    assert random_matching_search(gadget_cc(UNSAT_1), trials=2000, seed=7) == res


def test_random_search_finds_low_on_satisfiable():
    # jittered candidates are not exact witnesses, but they do get below the unsat gap
    f = CnfFormula(1, [[1, 1, 1]])
    assert random_matching_search(gadget_cc(f), trials=2000, seed=1)["best"] < 3 - 0.5
