import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import sample_sphere_points
from spunpearls.cli import random_even_word
from spunpearls.errors import NotABall, NotLiftable, OddWord
from spunpearls.inversive import INF, invert_point, is_inf, plane_sphere, sphere_from_center_radius
from spunpearls.twistor import (QMoebius, block_embed, c2_to_vector, chordal, equivariance_check,
                                even_word_to_qmoebius, fiber_check, fiber_points, fubini_study,
                                inversion_as_qmoebius, lift_point, normalize_projective, qconj, qinv,
                                qmatmul, qmoebius_to_complex4, qmul, qnorm2, quat_to_pair,
                                right_j, right_line_defect, twistor_project, vector_to_c2)

SET = settings(max_examples=50, deadline=None)
quat = st.lists(st.floats(-3, 3), min_size=4, max_size=4).map(np.array)
I, J, K = np.eye(4)[1], np.eye(4)[2], np.eye(4)[3]


def test_hamilton_rules():
    assert np.allclose(qmul(I, J), K)
    assert np.allclose(qmul(J, K), I)
    assert np.allclose(qmul(K, I), J)
    assert np.allclose(qmul(I, I), [-1, 0, 0, 0])
    assert np.allclose(qmul(I, qmul(J, K)), [-1, 0, 0, 0])


@SET
@given(quat, quat, quat)
def test_quaternion_algebra(p, q, r):
    assert np.allclose(qmul(qmul(p, q), r), qmul(p, qmul(q, r)), atol=1e-9)
    assert qnorm2(qmul(p, q)) == pytest.approx(qnorm2(p) * qnorm2(q), rel=1e-9, abs=1e-12)
    assert np.allclose(qconj(qmul(p, q)), qmul(qconj(q), qconj(p)), atol=1e-9)
    if qnorm2(p) > 1e-6:
        assert np.allclose(qmul(p, qinv(p)), [1, 0, 0, 0], atol=1e-9)


@SET
@given(quat, quat)
def test_block_embedding_is_multiplicative(p, q):
    # oracle: 1x1 quaternionic matrices embed as 2x2 complex blocks
    P = np.zeros((2, 2, 4))
    Q = np.zeros((2, 2, 4))
    P[0, 0], Q[0, 0] = p, q
    P[1, 1], Q[1, 1] = [1, 0, 0, 0], [1, 0, 0, 0]
    assert np.allclose(block_embed(qmatmul(P, Q)), block_embed(P) @ block_embed(Q), atol=1e-9)


def test_j_embeds_as_rotation():
    M = np.zeros((2, 2, 4))
    M[0, 0] = J
    M[1, 1] = [1, 0, 0, 0]
    B = block_embed(M)
    assert np.allclose(B[:2, :2], [[0, 1], [-1, 0]])


@SET
@given(quat)
def test_vector_coordinates_round_trip(q):
    z, w = vector_to_c2(q)
    assert np.allclose(c2_to_vector(z, w), q)
    zp, wp = quat_to_pair(q)
    assert zp == pytest.approx(q[0] + 1j * q[1])


def test_projection_reference_points():
    assert is_inf(twistor_project([1, 0, 0, 0]))
    assert np.allclose(twistor_project([0, 0, 1, 0]), 0)


@SET
@given(quat)
def test_lift_projects_back(x):
    assert np.allclose(twistor_project(lift_point(x)), x, atol=1e-9)


@SET
@given(quat, st.integers(0, 2 ** 31))
def test_fiber_points_project_to_base(x, seed):
    rng = np.random.default_rng(seed)
    for Z in fiber_points(x, 3, rng):
        assert chordal(twistor_project(Z), x) < 1e-9


@SET
@given(quat, st.floats(0.2, 3.0), quat)
def test_inversion_pointwise(c, r, x):
    s = sphere_from_center_radius(c, r)
    m = inversion_as_qmoebius(s)
    want = invert_point(s, x)
    got = m(x)
    if is_inf(want) or is_inf(got):
        return
    assert chordal(got, want) < 1e-8


def test_inversion_center_and_infinity():
    s = sphere_from_center_radius([1, 2, 0, 0], 0.5)
    m = inversion_as_qmoebius(s)
    assert is_inf(m(s.center))
    assert np.allclose(m(INF), s.center)


def test_plane_inversion_rejected():
    with pytest.raises(NotABall):
        inversion_as_qmoebius(plane_sphere([1, 0, 0, 0]))


def test_odd_words_do_not_lift(ring_gens):
    with pytest.raises(OddWord):
        even_word_to_qmoebius([0, 3, 1], ring_gens)
    m = inversion_as_qmoebius(sphere_from_center_radius([0, 0, 0, 0], 1))
    with pytest.raises(NotLiftable):
        qmoebius_to_complex4(m)
    with pytest.raises(NotLiftable):
        m @ QMoebius(m.matrix, True)


def test_composition_is_homomorphism(rng):
    a = inversion_as_qmoebius(sphere_from_center_radius([0.3, 0, 1, 0], 0.7))
    b = inversion_as_qmoebius(sphere_from_center_radius([-1, 0.5, 0, 0.2], 1.1))
    ab = a @ b
    for x in rng.normal(size=(20, 4)):
        assert chordal(ab(x), a(b(x))) < 1e-10
    L = qmoebius_to_complex4(ab)
    assert abs(np.linalg.det(L)) > 0


def test_ring_equivariance(ring_gens, rng):
    for _ in range(10):
        w = random_even_word(rng, len(ring_gens), 6)
        assert equivariance_check(w, ring_gens, 50, rng) < 1e-9
        assert fiber_check(w, ring_gens, 10, 3, rng) < 1e-9


def test_lift_commutes_with_right_j(ring_gens, rng):
    L = qmoebius_to_complex4(even_word_to_qmoebius([0, 3, 1, 4], ring_gens))
    for _ in range(5):
        Z = rng.normal(size=4) + 1j * rng.normal(size=4)
        assert right_line_defect(L, Z) < 1e-10


def test_fubini_study_and_normalize():
    Z = np.array([1j, 2, 0, 1])
    N = normalize_projective(Z)
    assert np.linalg.norm(N) == pytest.approx(1)
    assert fubini_study(Z, 3j * Z) == pytest.approx(0, abs=1e-7)
    assert fubini_study([1, 0, 0, 0], [0, 1, 0, 0]) == pytest.approx(np.pi / 2)
    with pytest.raises(ValueError):
        normalize_projective(np.zeros(4))


def test_right_j_is_antilinear_square_minus_one(rng):
    Z = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert np.allclose(right_j(right_j(Z)), -Z)
    # the fiber over a point is a complex line: Z and Zj project to the same point
    assert chordal(twistor_project(Z), twistor_project(right_j(Z))) < 1e-10


def test_chordal_metric():
    assert chordal(INF, INF) == 0.0
    assert chordal(np.zeros(4), INF) == pytest.approx(2.0)
    x, y = np.array([1.0, 0, 0, 0]), np.array([-1.0, 0, 0, 0])
    assert chordal(x, y) == pytest.approx(2.0)


def test_sphere_maps_to_sphere(rng):
    # a product of two inversions sends round spheres to round spheres
    a = inversion_as_qmoebius(sphere_from_center_radius([0.3, 0, 1, 0], 0.7))
    b = inversion_as_qmoebius(sphere_from_center_radius([-1, 0.5, 0, 0.2], 1.1))
    m = a @ b
    pts = np.array([m(p) for p in sample_sphere_points(rng, [2, 0, 0, 0], 0.5, 12)])
    # fit the sphere through the first 5 image points and test the rest
    A = np.hstack([2 * pts[:5], np.ones((5, 1))])
    sol = np.linalg.solve(A, np.sum(pts[:5] ** 2, axis=1))
    c = sol[:4]
    rad = np.sqrt(sol[4] + c @ c)
    assert np.allclose(np.linalg.norm(pts - c, axis=1), rad, rtol=1e-8)
