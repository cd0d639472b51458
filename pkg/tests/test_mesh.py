import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from movfd.geometry import Norm
from movfd.mesh import (DomainError, MonotonePath, QuadMesh, Reparameterization, align_meshes, eval_mesh,
                        subdivide)

from conftest import random_mesh


@pytest.fixture
def quad():
    # v(p, t): v(0,0)=0, v(1,0)=2, v(0,1)=4, v(1,1)=6
    return QuadMesh(np.array([[[0.0], [2.0]], [[4.0], [6.0]]]))


def test_eval_midpoint_is_corner_average(quad):
    assert eval_mesh(quad, 0.5, 0.5)[0] == pytest.approx(3.0)


def test_eval_on_edge(quad):
    assert eval_mesh(quad, 0.25, 0.0)[0] == pytest.approx(0.5, abs=1e-15)


def test_eval_at_vertices_returns_vertices(rng):
    m = random_mesh(rng, 3, 2, 3)
    for t in range(3):
        for p in range(4):
            assert np.array_equal(eval_mesh(m, p, t), m.vertices[t, p])


def test_eval_outside_domain(quad):
    with pytest.raises(DomainError):
        eval_mesh(quad, 1.5, 0.0)
    with pytest.raises(DomainError):
        eval_mesh(quad, 0.5, -0.1)


def test_eval_matches_dense_edge_formula(quad):
    s = np.linspace(0, 1, 101)
    assert np.allclose(eval_mesh(quad, s, 0.0)[:, 0], 2 * s)


def test_eval_in_cell_hull(rng):
    m = random_mesh(rng, 3, 3, 1)
    p, t = rng.random(500) * 3, rng.random(500) * 3
    v = eval_mesh(m, p, t)[:, 0]
    i, j = np.minimum(p.astype(int), 2), np.minimum(t.astype(int), 2)
    V = m.vertices[..., 0]
    corners = np.stack([V[j, i], V[j, i + 1], V[j + 1, i], V[j + 1, i + 1]])
    assert np.all(v >= corners.min(0) - 1e-12) and np.all(v <= corners.max(0) + 1e-12)


def test_subdivide_no_cuts_identity(rng):
    m = random_mesh(rng, 2, 2)
    assert subdivide(m) == m


def test_subdivide_one_cut(quad, rng):
    s = subdivide(quad, [0.5], [])
    assert (s.P, s.T) == (2, 1)
    p, t = rng.random(100), rng.random(100)
    assert np.allclose(eval_mesh(s, 2 * p, t), eval_mesh(quad, p, t), atol=1e-12)


def test_subdivide_many_cuts(rng):
    m = random_mesh(rng, 4, 3, 2)
    pc, tc = [0.25, 1.0 / 3, 1.5, 3.75], [0.5, 2.2]
    s = subdivide(m, pc, tc)
    assert (s.P, s.T) == (4 + len(pc), 3 + len(tc))
    # locate sample points through the cut coordinates
    gp = np.unique(np.concatenate([np.arange(5.0), pc]))
    gt = np.unique(np.concatenate([np.arange(4.0), tc]))
    p, t = rng.random(200) * 4, rng.random(200) * 3
    ip = np.interp(p, gp, np.arange(len(gp)))
    it = np.interp(t, gt, np.arange(len(gt)))
    assert np.allclose(eval_mesh(s, ip, it), eval_mesh(m, p, t), atol=1e-12)


@pytest.mark.parametrize("cuts", [[0.5, 0.25], [0.5, 0.5], [0.0], [2.0]])
def test_subdivide_bad_cuts(quad, cuts):
    with pytest.raises(ValueError):
        subdivide(quad, cuts, [])


def test_align_identity_unchanged(rng):
    a, b = random_mesh(rng, 3, 2), random_mesh(rng, 3, 2)
    a2, b2 = align_meshes(a, b)
    assert a2 == a and b2 == b


def test_align_piecewise_time_axis(rng):
    tau = Reparameterization([(0, 0), (1.5, 2.5), (4, 4)])
    assert [tau(x) for x in (0, 1.5, 4)] == [0, 2.5, 4]
    a, b = random_mesh(rng, 2, 4), random_mesh(rng, 2, 4)
    a2, b2 = align_meshes(a, b, None, tau)
    pulled = {float(tau.inverse(k)) for k in range(5)}
    expected = sorted(set(range(5)) | pulled | {1.5})
    assert a2.T == len(expected) - 1
    times = np.array(expected)
    assert np.allclose(a2.vertices[:, 0], eval_mesh(a, 0.0, times))
    assert np.allclose(b2.vertices[:, 0], eval_mesh(b, 0.0, np.array([tau(x) for x in times])))


def _random_reparam(rng, la, lb, k):
    xs = np.concatenate([[0.0], np.sort(rng.random(k)) * la, [la]])
    xs = np.unique(xs)
    ys = np.concatenate([[0.0], np.sort(rng.random(len(xs) - 2)) * lb, [lb]])
    return Reparameterization(list(zip(xs, ys)))


def test_align_random_pointwise(rng):
    for _ in range(5):
        a, b = random_mesh(rng, 3, 2), random_mesh(rng, 4, 3)
        pi, tau = _random_reparam(rng, 3, 4, 3), _random_reparam(rng, 2, 3, 2)
        a2, b2 = align_meshes(a, b, pi, tau)
        assert a2.vertices.shape == b2.vertices.shape
        # vertex (i, j) of the outputs corresponds under (pi, tau)
        pos = MonotonePath.from_reparam(pi).refined()
        tim = MonotonePath.from_reparam(tau).refined()
        for _ in range(200):
            i, j = rng.integers(len(pos)), rng.integers(len(tim))
            assert np.allclose(a2.vertices[j, i], eval_mesh(a, pos[i, 0], tim[j, 0]), atol=1e-12)
            assert np.allclose(b2.vertices[j, i], eval_mesh(b, pi(pos[i, 0]), tau(tim[j, 0])), atol=1e-12)


def test_align_rejects_mismatched_reparam(rng):
    a, b = random_mesh(rng, 3, 2), random_mesh(rng, 4, 2)
    with pytest.raises(ValueError):
        align_meshes(a, b, Reparameterization.identity(3), None)


def test_reparameterization_validation():
    with pytest.raises(ValueError):
        Reparameterization([(0, 0), (1, 2), (1, 3)])
    with pytest.raises(ValueError):
        Reparameterization([(0, 0), (1, 2), (2, 1)])
    with pytest.raises(ValueError):
        Reparameterization([(0.5, 0), (1, 1)])


def test_reparameterization_inverse_flat_left_endpoint():
    r = Reparameterization([(0, 0), (1, 1), (2, 1), (3, 2)])
    assert r.inverse(1.0) == 1.0
    assert r.inverse(1.5) == pytest.approx(2.5)


def test_reparameterization_compose():
    f = Reparameterization([(0, 0), (1, 2), (2, 4)])
    g = Reparameterization([(0, 0), (4, 1)])
    h = g.compose(f)
    for x in np.linspace(0, 2, 9):
        assert h(x) == pytest.approx(g(f(x)))


def test_mesh_json_roundtrip_bit_exact(rng):
    m = random_mesh(rng, 3, 2, 3)
    text = json.dumps(m.to_json())
    m2 = QuadMesh.from_json(json.loads(text))
    assert np.array_equal(m.vertices, m2.vertices)
    assert json.dumps(m2.to_json()) == text


def test_reparam_json_roundtrip():
    r = Reparameterization([(0, 0), (1 / 3, 0.1), (2, 7 / 9)])
    assert Reparameterization.from_json(json.loads(json.dumps(r.to_json()))) == r


def test_mesh_json_header_mismatch():
    with pytest.raises(ValueError):
        QuadMesh.from_json({"P": 2, "T": 0, "dim": 1, "vertices": [[[0], [1]]]})


vec = arrays(np.float64, 3, elements=st.floats(-1e3, 1e3, allow_nan=False))


@settings(max_examples=200, deadline=None)
@given(vec, vec, st.floats(-10, 10), st.sampled_from(list(Norm)))
def test_norm_axioms(u, v, c, norm):
    assert norm(u) >= 0
    assert norm(u - v) == pytest.approx(norm(v - u))
    assert norm(u + v) <= norm(u) + norm(v) + 1e-9
    assert norm(c * u) == pytest.approx(abs(c) * norm(u), rel=1e-9, abs=1e-9)
