import numpy as np
import pytest

from movfd.geometry import Norm
from movfd.identity import difference_mesh, frechet_identity, frechet_pl
from movfd.mesh import MonotonePath, QuadMesh, Reparameterization, eval_mesh
from movfd.witness import MatchingWitness

from conftest import random_mesh


def test_equal_meshes_zero(rng):
    a = random_mesh(rng, 3, 2)
    assert frechet_identity(a, a)[0] == 0.0


def test_translation_gives_offset_norm(rng):
    a = random_mesh(rng, 3, 2)
    b = QuadMesh(a.vertices + np.array([3.0, -4.0]))
    d, _ = frechet_identity(a, b, Norm.L2)
    assert d == pytest.approx(5.0)
    assert frechet_identity(a, b, "linf")[0] == pytest.approx(4.0)
    assert frechet_identity(a, b, "l1")[0] == pytest.approx(7.0)


@pytest.mark.parametrize("norm", list(Norm))
def test_integer_meshes_vs_dense_samples(rng, norm):
    a = random_mesh(rng, 3, 3, integer=True)
    b = random_mesh(rng, 3, 3, integer=True)
    d, (p, t) = frechet_identity(a, b, norm)
    s = np.linspace(0, 3, 100)
    diff = eval_mesh(a, s[None, :], s[:, None]) - eval_mesh(b, s[None, :], s[:, None])
    sampled = norm(diff).max()
    assert d >= sampled - 1e-12
    assert d == pytest.approx(sampled, abs=1e-9)
    assert d == norm(a.vertices[t, p] - b.vertices[t, p])


def test_difference_mesh_is_pointwise(rng):
    a, b = random_mesh(rng, 2, 2), random_mesh(rng, 2, 2)
    c = difference_mesh(a, b)
    p, t = rng.random(50) * 2, rng.random(50) * 2
    assert np.allclose(eval_mesh(c, p, t), eval_mesh(a, p, t) - eval_mesh(b, p, t))


def test_shape_mismatch(rng):
    with pytest.raises(ValueError):
        frechet_identity(random_mesh(rng, 2, 2), random_mesh(rng, 3, 2))


def test_tie_break_smallest_t_then_p():
    a = QuadMesh(np.zeros((2, 3, 1)))
    b = QuadMesh(np.array([[[0.0], [1.0], [1.0]], [[1.0], [0.0], [0.0]]]))
    assert frechet_identity(a, b)[1] == (1, 0)


def test_symmetry_and_triangle(rng):
    for _ in range(20):
        a, b, c = (random_mesh(rng, 3, 2) for _ in range(3))
        for norm in Norm:
            ab, ba = frechet_identity(a, b, norm)[0], frechet_identity(b, a, norm)[0]
            assert ab == pytest.approx(ba)
            assert frechet_identity(a, c, norm)[0] <= ab + frechet_identity(b, c, norm)[0] + 1e-12


def test_pl_identity_matches_identity(rng):
    a, b = random_mesh(rng, 3, 2), random_mesh(rng, 3, 2)
    pi, tau = Reparameterization.identity(3), Reparameterization.identity(2)
    assert frechet_pl(a, b, pi, tau) == pytest.approx(frechet_identity(a, b)[0])


def test_pl_time_stretch_zero(rng):
    a = random_mesh(rng, 3, 2)
    # b traverses the same surface twice as slowly
    ts = np.arange(5) / 2.0
    ps = np.arange(4.0)
    b = QuadMesh(eval_mesh(a, ps[None, :], ts[:, None]))
    assert frechet_pl(a, b, None, Reparameterization.linear(2, 4)) == pytest.approx(0.0, abs=1e-12)


def test_pl_piecewise_tau_vs_dense_samples(rng):
    tau = Reparameterization([(0, 0), (1.5, 2.5), (4, 4)])
    pi = Reparameterization([(0, 0), (0.7, 1.6), (3, 3)])
    for norm in Norm:
        a, b = random_mesh(rng, 3, 4), random_mesh(rng, 3, 4)
        d = frechet_pl(a, b, pi, tau, norm)
        # dense samples plus every cell-crossing parameter of both matchings
        ps = np.union1d(np.linspace(0, 3, 301), MonotonePath.from_reparam(pi).refined()[:, 0])
        ts = np.union1d(np.linspace(0, 4, 401), MonotonePath.from_reparam(tau).refined()[:, 0])
        A = eval_mesh(a, ps[None, :], ts[:, None])
        B = eval_mesh(b, pi(ps)[None, :], tau(ts)[:, None])
        assert d == pytest.approx(norm(A - B).max(), abs=1e-9)


def test_witness_verify_identity(rng):
    a, b = random_mesh(rng, 2, 2), random_mesh(rng, 2, 2)
    w = MatchingWitness("identity", MonotonePath([(0, 0), (2, 2)]))
    assert w.verify(a, b) == pytest.approx(frechet_identity(a, b)[0])
