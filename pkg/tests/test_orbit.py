import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import canonical_balls, heap_depth, left_tree_counts
from spunpearls.errors import BudgetExceeded, InsufficientDepth, InvalidEpsilon, ValidationRequired
from spunpearls.inversive import map_sphere, matrix_distance, reframe
from spunpearls.necklace import spin_necklace
from spunpearls.orbit import (DONE, EXPANDED, append_letter, cloud, containment_margin, count_balls,
                              count_report, expand_frontier, format_count_report, generators_from_necklace,
                              grow, invariance_defect, limit_set_points, load_checkpoint,
                              max_depth_complete, new_frontier, closed_form_counts, parent_margin,
                              poincare_check, reduce, relation_defect, right_descents, save_checkpoint,
                              shell, word_map)

SET = settings(max_examples=40, deadline=None)
ring_word = st.lists(st.integers(0, 5), max_size=14)


@pytest.fixture(scope="module")
def ring_deep(ring_gens):
    return grow(ring_gens, 1e-300, 3)


# ---- words

def test_reduce_basic(ring_gens):
    c = ring_gens.commute
    assert reduce([0, 0], c) == []
    assert reduce([1, 0], c) == [0, 1]          # 0 and 1 commute, sorted
    assert reduce([3, 0], c) == [3, 0]          # 0 and 3 do not
    assert reduce([0, 1, 0], c) == [1]
    assert right_descents([0, 3, 4], c) == [3, 4]


@SET
@given(ring_word)
def test_reduce_matches_matrices(ring_gens, w):
    # oracle: the composed Lorentz matrices agree
    r = reduce(w, ring_gens.commute)
    assert len(r) <= len(w) and (len(w) - len(r)) % 2 == 0
    a, b = word_map(ring_gens, w), word_map(ring_gens, r)
    assert matrix_distance(a, b) < 1e-6 * max(1.0, np.abs(a.matrix).max())


@SET
@given(ring_word)
def test_reduce_idempotent_and_inverse(ring_gens, w):
    c = ring_gens.commute
    r = reduce(w, c)
    assert reduce(r, c) == r
    assert reduce(r + r[::-1], c) == []


@SET
@given(ring_word, st.integers(0, 5))
def test_append_letter_is_reduce(ring_gens, w, x):
    c = ring_gens.commute
    r = reduce(w, c)
    assert append_letter(r, x, c) == reduce(r + [x], c)


# ---- generators

def test_generators_need_validation(trefoil_semi):
    sn = spin_necklace(trefoil_semi.replace(centers=trefoil_semi.centers[:1], radii=trefoil_semi.radii[:1]),
                       rectify=False, poles=False)
    with pytest.raises(ValidationRequired):
        generators_from_necklace(sn)


def test_relations_ring(ring_gens):
    for i in range(6):
        assert relation_defect(ring_gens, i) <= 1e-12
        assert relation_defect(ring_gens, i, (i + 1) % 6) <= 1e-12
    # non-commuting pair: (I0 I3)^2 is far from the identity
    assert relation_defect(ring_gens, 0, 3) > 1e-2


def test_poincare_ring(ring):
    assert poincare_check(ring).passed


# ---- refinement against oracles

def test_frontier_matches_bruteforce_canonical_balls(ring_gens, ring_deep):
    c = ring_gens.commute
    oracle = canonical_balls(c, reduce, 5)
    want = {key for key, d in oracle.items() if d <= 2}
    got = set()
    for k in range(len(ring_deep)):
        if ring_deep.depths[k] <= 2:
            got.add((tuple(ring_deep.words[k]), ring_deep.targets[k]))
            assert heap_depth(list(ring_deep.word(k)), c) == ring_deep.depths[k]
    assert got == want


def test_counts_match_left_tree_oracle(ring_gens, domino_gens):
    assert count_balls(ring_gens, 4) == left_tree_counts(ring_gens.commute, 4) == [6, 30, 174, 1014, 5910]
    assert count_balls(domino_gens, 2) == left_tree_counts(domino_gens.commute, 2) == [20, 1196, 87740]


def test_geometric_counts_equal_word_counts(ring_deep, ring_gens):
    per = [int(np.sum(ring_deep.depths == d)) for d in range(4)]
    assert per == count_balls(ring_gens, 3)
    assert ring_deep.duplicates == 0 and ring_deep.anomalies == 0


def test_ball_geometry_matches_word_maps(ring_gens, ring_deep):
    # oracle: push the pearl through the composed Lorentz matrix
    rng = np.random.default_rng(0)
    for k in rng.choice(len(ring_deep), 60, replace=False):
        w = ring_deep.word(k)
        m = word_map(ring_gens, w[:-1])
        s = map_sphere(m, reframe(ring_gens.spheres[w[-1]], ring_gens.shift, ring_gens.scale))
        assert np.allclose(s.center, ring_deep.centers[k], atol=1e-9)
        assert s.radius == pytest.approx(ring_deep.radii[k], rel=1e-8)


def test_children_nest_in_parents(ring_deep, domino_gens):
    assert parent_margin(ring_deep) >= -1e-9
    f = grow(domino_gens, 1e-300, 2)
    assert parent_margin(f) >= -1e-9
    assert f.duplicates == 0


def _rot60():
    t = np.pi / 3
    R = np.eye(4)
    R[2:, 2:] = [[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]]
    return R


def test_rotation_permutes_depth_shells(ring_gens, ring_deep):
    # the ring is invariant under rotation by 60 degrees, so is every complete shell
    from scipy.spatial import cKDTree
    pts = ring_gens.from_frame(ring_deep.centers)
    d, _ = cKDTree(pts).query(pts @ _rot60().T)
    assert d.max() < 1e-9


def test_rotated_cloud_within_eps(ring, ring_gens):
    # cutoff leaves are chosen per parent, so the cloud is symmetric up to eps
    from scipy.spatial import cKDTree
    pts = limit_set_points(ring, 1e-2, 10, gens=ring_gens)
    d, _ = cKDTree(pts).query(pts @ _rot60().T)
    assert d.max() <= 1e-2


# ---- frontier bookkeeping

def test_shell_and_depth(ring_gens):
    f = grow(ring_gens, 1e-300, 2)
    assert max_depth_complete(f) == 2
    assert len(shell(f, 1)) == 30
    with pytest.raises(InsufficientDepth):
        shell(f, 3)
    assert containment_margin(f, 1) >= -1e-9


def test_eps_validation(ring_gens):
    with pytest.raises(InvalidEpsilon):
        new_frontier(ring_gens, 0.0, 3)
    with pytest.raises(InvalidEpsilon):
        limit_set_points(None, -1, 3, gens=ring_gens)


def test_budget_exceeded_keeps_frontier(ring_gens):
    with pytest.raises(BudgetExceeded) as e:
        grow(ring_gens, 1e-300, 5, max_balls=100)
    f = e.value.frontier
    assert f is not None and len(f) <= 100
    # resuming with a larger budget reaches the same result as a fresh run
    grow(ring_gens, 1e-300, 5, frontier=f)
    fresh = grow(ring_gens, 1e-300, 5)
    assert len(f) == len(fresh)


def test_checkpoint_round_trip(tmp_path, ring_gens):
    f = new_frontier(ring_gens, 1e-2, 6)
    expand_frontier(f)
    expand_frontier(f)
    path = tmp_path / "ck.json"
    save_checkpoint(f, path)
    doc = json.loads(path.read_text())
    assert doc["format"] == "spunpearls-checkpoint" and doc["version"] == 1
    g = load_checkpoint(path, ring_gens)
    assert len(g) == len(f)
    assert np.allclose(g.centers, f.centers, atol=1e-12)
    grow(ring_gens, 1e-2, 6, frontier=g)
    grow(ring_gens, 1e-2, 6, frontier=f)
    assert np.array_equal(cloud(g), cloud(f))


def test_cloud_order_and_status(ring_gens):
    f = grow(ring_gens, 5e-2, 8)
    pts = cloud(f)
    done = np.flatnonzero(f.status == DONE)
    assert len(pts) == len(done)
    assert np.all(f.radii[done] * ring_gens.scale < 5e-2)
    assert not np.any(f.status[f.status != EXPANDED] == 0)


def test_invariance_small_cloud(ring, ring_gens):
    pts = limit_set_points(ring, 1e-2, 10, gens=ring_gens)
    assert invariance_defect(pts, ring_gens) <= 2e-2


# ---- count report

def test_closed_form_counts_formulas():
    p = closed_form_counts(10, 2)
    assert p == {"layer1": 80, "layer2": 870, "copies": 10 * (80 // 8) + 1, "shell": 2 * 10 * 49}
    with pytest.raises(ValueError):
        closed_form_counts(2, 1)


@SET
@given(st.integers(3, 60), st.integers(0, 6))
def test_closed_form_counts_exact_integers(n, k):
    p = closed_form_counts(n, k)
    assert p["layer1"] == n * (n - 2)
    assert p["layer2"] == n * (n * n - 2 * n + 7)
    assert p["shell"] == 2 * n * (n - 3) ** k
    # geometric series computed term by term
    assert p["copies"] == n * sum((n - 1) ** t for t in range(k)) + 1


def test_count_report(ring_deep):
    rep = count_report(ring_deep, 10, 3)
    assert rep["closed_forms"]["layer1"] == 80 and rep["closed_forms"]["layer2"] == 870
    assert rep["per_depth"] == rep["words"][:4]
    text = format_count_report(rep)
    assert "layer1 = 80" in text and "layer2 = 870" in text
