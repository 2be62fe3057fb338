import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spunpearls.errors import ConstructionInfeasible, EmptyNecklace, OverlapViolation
from spunpearls.inversive import PairType, gram_psd, pair_inner, sphere_from_center_radius, spin_sphere
from spunpearls.necklace import (MERIDIANS, ORTH, PearlLabel, SemiNecklace, consecutive_residuals,
                                 hexagon_residuals, quad_common_point, quad_law_residual, quads,
                                 rectify_semi, ring_angle, rotate_necklace, solve_junction_pearl,
                                 solve_pole_pearl, spin_necklace, spun_surface_components, table_checksum,
                                 validate_semi, validate_spun)

SQRT2 = np.sqrt(2.0)


def test_table_shape_and_printed_rows(trefoil_semi):
    s = trefoil_semi
    assert len(s) == 85
    assert np.all(s.centers[:, 3] == 0) and np.all(s.centers[:, 2] > 0)
    # every radius equals its height over sqrt2 up to printing
    assert np.max(np.abs(s.radii * SQRT2 - s.centers[:, 2]) / s.radii) < 1e-5
    assert s.labels[0] == "S1" and s.labels[-1] == "S85"


def test_checksum_detects_edit(trefoil_semi):
    rows = [{"center": c[:3].tolist(), "radius": r} for c, r in zip(trefoil_semi.centers, trefoil_semi.radii)]
    h = table_checksum(rows)
    rows[10]["radius"] += 1e-9
    assert table_checksum(rows) != h


def test_residual_oracle_direct_loop(trefoil_semi):
    s = trefoil_semi
    ref = []
    for k in range(1, len(s)):
        d2 = sum((s.centers[k][t] - s.centers[k - 1][t]) ** 2 for t in range(4))
        w = s.radii[k] ** 2 + s.radii[k - 1] ** 2
        ref.append(abs(d2 - w) / w)
    assert np.allclose(consecutive_residuals(s), ref, rtol=1e-12, atol=1e-18)
    h = [abs(r - c[2] / SQRT2) / r for c, r in zip(s.centers, s.radii)]
    assert np.allclose(hexagon_residuals(s), h, rtol=1e-12, atol=1e-18)


def test_validate_semi_passes(trefoil_semi):
    rep = validate_semi(trefoil_semi)
    assert rep.passed
    assert rep.count(ORTH) == (84, 84)
    assert "verdict: PASS" in rep.summary()


def test_validate_semi_flags_broken_pair(trefoil_semi):
    c = np.array(trefoil_semi.centers)
    c[40, 0] += 0.5 * trefoil_semi.radii[40]
    rep = validate_semi(trefoil_semi.replace(centers=c))
    assert not rep.passed
    assert any(f.violation == "OrthogonalityViolation" for f in rep.failures())


def test_empty_semi():
    with pytest.raises(EmptyNecklace):
        validate_semi(SemiNecklace(np.zeros((0, 4)), []))
    with pytest.raises(EmptyNecklace):
        spin_necklace(SemiNecklace(np.zeros((0, 4)), []))


def test_rectify_moves_little_and_fixes_products(trefoil_semi):
    r, disp = rectify_semi(trefoil_semi)
    assert disp < 1e-4
    assert consecutive_residuals(r).max() < 1e-12
    assert np.allclose(r.radii, r.centers[:, 2] / SQRT2, rtol=1e-14)


def test_spun_trefoil_counts(trefoil):
    n_mer = 85 * MERIDIANS
    kinds = [lab.kind for lab in trefoil.labels]
    assert kinds.count("meridian") == n_mer
    assert kinds.count("pole") == 2
    assert kinds.count("junction") == 84 * MERIDIANS
    assert len(trefoil) == 1016
    assert trefoil.validated


def test_spun_trefoil_residuals(trefoil):
    rep = trefoil.report
    assert rep.residuals["orthogonal"] <= 1e-6
    assert rep.residuals["tangent"] <= 1e-6
    assert rep.residuals["quad law"] <= 1e-6
    assert rep.residuals["common point"] <= 1e-6


def test_validate_spun_oracle_pairwise(ring):
    # recompute classification with a plain double loop over pair_inner
    rep = validate_spun(ring)
    n = len(ring)
    for k, (i, j) in enumerate(rep.pairs):
        v = pair_inner(ring.spheres[i], ring.spheres[j])
        t = ring.adjacency.get((int(i), int(j)))
        if t == PairType.ORTHOGONAL:
            assert abs(v) <= 1e-6
        elif t == PairType.TANGENT:
            assert abs(abs(v) - 1) <= 1e-6
        else:
            assert v > 1 + 1e-6
        assert rep.values[k] == pytest.approx(v, abs=1e-12)
    assert len(rep.pairs) == n * (n - 1) // 2


def test_toy_ring_structure(ring):
    assert len(ring) == 6
    assert len(ring.orthogonal_pairs()) == 6
    assert ring.validated


def test_ring_rotation_symmetry(ring):
    rot = rotate_necklace(ring, 1)
    for k in range(6):
        s = rot[k]
        t = ring.spheres[(k + 1) % 6]
        assert np.allclose(s.center, t.center, atol=1e-14)


def test_domino_validates(domino):
    assert len(domino) == 20
    assert domino.validated
    kinds = [lab.kind for lab in domino.labels]
    assert kinds.count("junction") == 6 and kinds.count("pole") == 2


def test_pole_pearl_orthogonal_to_ring(ring):
    pole = solve_pole_pearl(ring.spheres, np.zeros(4))
    for s in ring.spheres:
        assert abs(pair_inner(pole, s)) < 1e-12


def test_pole_inside_pearl_is_infeasible(ring):
    with pytest.raises(ConstructionInfeasible):
        solve_pole_pearl(ring.spheres, ring.spheres[0].center)


def test_pole_asymmetric_ring_infeasible(ring):
    with pytest.raises(ConstructionInfeasible):
        solve_pole_pearl(ring.spheres, np.array([0.1, 0, 0, 0]) + np.array([0, 0, 0.2, 0]))


def test_quad_oracle_on_trefoil(trefoil):
    for q in quads(trefoil)[:60]:
        four = [trefoil.spheres[t] for t in q]
        p, res = quad_common_point(four)
        assert res < 1e-6
        assert quad_law_residual(four) < 1e-6
        assert gram_psd(four, tol=1e-6)


def test_junction_pearls_orthogonal(trefoil):
    for q, lab in zip(quads(trefoil), [l for l in trefoil.labels if l.kind == "junction"]):
        P = trefoil.spheres[trefoil.index(lab)]
        for t in q:
            assert abs(pair_inner(P, trefoil.spheres[t])) < 1e-9


def test_junction_solver_rejects_non_quad(ring):
    four = [ring.spheres[k] for k in (0, 1, 2, 3)]
    with pytest.raises(ConstructionInfeasible):
        solve_junction_pearl(four)


def test_two_level_default_poles_infeasible(trefoil_semi):
    # the second pole pearl swallows level one, so some junction cannot fit
    with pytest.raises(OverlapViolation, match="pole2"):
        spin_necklace(trefoil_semi.replace(centers=trefoil_semi.centers[:2], radii=trefoil_semi.radii[:2]))


def test_labels_print():
    assert str(PearlLabel("meridian", 3, 2)) == "S[3,2]"
    assert str(PearlLabel("junction", 1, 6)) == "P[1,6]"
    assert str(PearlLabel("pole", 2)) == "pole2"


def test_surface_trace_components(trefoil_semi):
    # each pearl meets the spun polygonal surface in one piece
    sub = trefoil_semi.replace(centers=trefoil_semi.centers[:12], radii=trefoil_semi.radii[:12])
    assert set(spun_surface_components(sub)) == {1}


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 5))
def test_spinning_preserves_products(z, x1, x2, k):
    # two orthogonal pearls in the page stay orthogonal after spinning both by the same angle
    a = sphere_from_center_radius([x1, x2, z, 0], z / SQRT2)
    r2 = z / SQRT2 * 0.8
    d = np.sqrt((z / SQRT2) ** 2 + r2 ** 2)
    b = sphere_from_center_radius([x1 + d, x2, z, 0], r2)
    t = ring_angle(k)
    assert pair_inner(spin_sphere(a, t), spin_sphere(b, t)) == pytest.approx(pair_inner(a, b), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.3, 4.0))
def test_single_ring_hexagon_law(z):
    # with r = z/sqrt2, neighbouring meridian copies are exactly orthogonal
    s = sphere_from_center_radius([0, 0, z, 0], z / SQRT2)
    a, b = spin_sphere(s, ring_angle(1)), spin_sphere(s, ring_angle(2))
    assert abs(pair_inner(a, b)) < 1e-12
