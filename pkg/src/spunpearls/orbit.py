"""Orbit enumeration for the reflection group of a necklace.

The group is right-angled: I_j^2 = 1 and I_i I_j = I_j I_i when pearls i
and j are orthogonal.  Elements are kept as reduced words in shortlex
normal form.

A ball u(B_i) is recorded once, for the representative u with no right
descent in {i} or in the orthogonal neighbours of i (those letters fix
B_i).  The depth of a ball is the height of the heap of u.i above its last
letter, so depth 0 is the pearls themselves and every depth d+1 ball sits
inside a depth d ball.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import BudgetExceeded, InsufficientDepth, InvalidEpsilon, ValidationRequired
from .inversive import (
    InversiveSphere,
    PairType,
    _ball_vector,
    compose,
    identity_map,
    inversion_in,
    map_sphere,
    matrix_distance,
    reframe,
    same_sphere,
)

ACTIVE, DONE, STOPPED, EXPANDED = 0, 1, 2, 3
CHECKPOINT_FORMAT = "spunpearls-checkpoint"
CHECKPOINT_VERSION = 1


# ---------------------------------------------------------------- words

def append_letter(word, x, commute):
    """Normal form of word.x for a word already in normal form."""
    w = list(word)
    k = len(w) - 1
    while k >= 0:
        y = w[k]
        if y == x:
            del w[k]
            return w
        if not commute[x, y]:
            break
        k -= 1
    q = k + 1
    while q < len(w) and w[q] < x:
        q += 1
    w.insert(q, x)
    return w


def reduce(word, commute):
    """Shortlex normal form of a word in the right-angled group."""
    out = []
    for x in word:
        out = append_letter(out, x, commute)
    return out


def right_descents(word, commute):
    """Letters that can be moved to the end of ``word``."""
    out = []
    for k, y in enumerate(word):
        if all(commute[y, z] for z in word[k + 1:]):
            out.append(y)
    return out


# ---------------------------------------------------------------- generators

@dataclass
class GeneratorSet:
    """Reflections in the pearls of a validated necklace.

    ``nij`` is 2 for orthogonal pairs and 0 otherwise (1 on the diagonal).
    ``centers``/``radii`` are in a frame x' = (x - shift)/scale that keeps the
    spin axis; the maps in ``maps`` act in the original coordinates.
    """

    spheres: list
    maps: list
    nij: np.ndarray
    shift: np.ndarray
    scale: float
    centers: np.ndarray
    radii: np.ndarray
    labels: list = field(default_factory=list)

    def __len__(self):
        return len(self.spheres)

    @cached_property
    def masks(self):
        return _Masks(self.commute)

    @property
    def commute(self) -> np.ndarray:
        return self.nij == 2

    def to_frame(self, pts):
        return (np.asarray(pts, float) - self.shift) / self.scale

    def from_frame(self, pts):
        return np.asarray(pts, float) * self.scale + self.shift


def generators_from_necklace(sn) -> GeneratorSet:
    if not getattr(sn, "validated", False):
        raise ValidationRequired("run validate_spun on the necklace first (and make it pass)")
    n = len(sn)
    nij = np.zeros((n, n), dtype=int)
    np.fill_diagonal(nij, 1)
    for (i, j), t in sn.adjacency.items():
        if t == PairType.ORTHOGONAL:
            nij[i, j] = nij[j, i] = 2
    c = sn.centers
    r = sn.radii
    shift = np.array([c[:, 0].mean(), c[:, 1].mean(), 0.0, 0.0])
    scale = float(np.max(np.linalg.norm(c - shift, axis=1) + r))
    return GeneratorSet(list(sn.spheres), [inversion_in(s) for s in sn.spheres], nij,
                        shift, scale, (c - shift) / scale, r / scale, list(sn.labels))


def _local(gens, idx):
    """Reframe the listed generators around themselves so entries stay O(1)."""
    c = np.array([gens.spheres[i].center for i in idx])
    r = np.array([gens.spheres[i].radius for i in idx])
    shift = c.mean(axis=0)
    scale = float(max(r.max(), np.linalg.norm(c - shift, axis=1).max()))
    return [inversion_in(reframe(gens.spheres[i], shift, scale)) for i in idx]


def relation_defect(gens: GeneratorSet, i, j=None) -> float:
    """Matrix distance from the identity of I_i^2, or of (I_i I_j)^2.

    Similarity changes of frame conjugate the relation, and the identity is
    fixed by conjugation, so the check is made in a frame around the pearls
    involved.
    """
    if j is None:
        (L,) = _local(gens, [i])
        return matrix_distance((L @ L).matrix, np.eye(6))
    Li, Lj = _local(gens, [i, j])
    P = Li @ Lj
    return matrix_distance((P @ P).matrix, np.eye(6))


def word_map(gens: GeneratorSet, word, frame=True):
    """Composed map I_w1 I_w2 ... (in the generator frame by default)."""
    m = identity_map()
    for x in word:
        s = gens.spheres[x]
        if frame:
            s = reframe(s, gens.shift, gens.scale)
        m = compose(m, inversion_in(s))
    return m


# ---------------------------------------------------------------- balls

@dataclass(frozen=True)
class LeafBall:
    word: tuple     # normal form of u followed by the pearl index
    center: np.ndarray
    radius: float
    depth: int
    sign: int = 1

    @property
    def target(self):
        return self.word[-1]

    def sphere(self):
        return InversiveSphere(self.sign * _ball_vector(self.center, self.radius),
                               self.center, self.radius, self.sign)


class _Masks:
    """Per-letter bitmasks of the commutation graph."""

    def __init__(self, commute):
        n = len(commute)
        self.n = n
        self.full = (1 << n) - 1
        self.comm = [sum(1 << int(j) for j in np.flatnonzero(commute[k])) for k in range(n)]
        self.noncomm = [self.full & ~m for m in self.comm]   # includes k itself
        self.below = [(1 << k) - 1 for k in range(n)]
        self.above = [self.full & ~((1 << (k + 1)) - 1) for k in range(n)]


def _bits(m):
    out = []
    while m:
        low = m & -m
        out.append(low.bit_length() - 1)
        m ^= low
    return out


@dataclass
class OrbitFrontier:
    """Balls u(B_i) grown by nested refinement, in generation order.

    A ball of depth d is replaced by the depth d+1 balls inside it.  Those
    are u.t.i(B_j) with j not fixed by I_i and t a reduced word in the
    orthogonal neighbours of i (the stabiliser of B_i).  ``parents`` holds
    the containing ball.

    Coordinates are in the generator frame.  ``status`` is ACTIVE (still to
    refine), DONE (radius below the cutoff, a leaf of the cloud), STOPPED
    (depth limit reached) or EXPANDED.
    """

    gens: GeneratorSet
    eps: float
    depth_limit: int
    words: list
    targets: list
    parents: list
    centers: np.ndarray
    radii: np.ndarray
    signs: np.ndarray
    depths: np.ndarray
    status: np.ndarray
    index: dict
    generation: int = 0
    duplicates: int = 0
    anomalies: int = 0

    def __len__(self):
        return len(self.targets)

    @property
    def active(self):
        return np.flatnonzero(self.status == ACTIVE)

    @property
    def complete(self) -> bool:
        return not np.any(self.status == ACTIVE)

    def word(self, k) -> tuple:
        return tuple(self.words[k]) + (self.targets[k],)

    def ball(self, k) -> LeafBall:
        c = self.gens.from_frame(self.centers[k])
        return LeafBall(self.word(k), c, float(self.radii[k] * self.gens.scale),
                        int(self.depths[k]), int(self.signs[k]))

    def balls(self, ks):
        return [self.ball(k) for k in ks]


QUANTUM = 1e-9


def _keys(centers, radii):
    q = np.round(np.hstack([centers, np.asarray(radii).reshape(-1, 1)]) / QUANTUM).astype(np.int64)
    return [row.tobytes() for row in q]


def _status(radii, depths, e, limit):
    st = np.where(depths >= limit, STOPPED, ACTIVE)
    return np.where(radii < e, DONE, st)


def new_frontier(gens: GeneratorSet, eps: float, depth_limit: int) -> OrbitFrontier:
    if not eps > 0:
        raise InvalidEpsilon(f"epsilon must be positive, got {eps!r}")
    n = len(gens)
    radii = gens.radii.copy()
    depths = np.zeros(n, dtype=int)
    index = {key: k for k, key in enumerate(_keys(gens.centers, radii))}
    return OrbitFrontier(gens, float(eps), int(depth_limit), [()] * n, list(range(n)),
                         [-1] * n, gens.centers.copy(), radii, np.ones(n, dtype=int), depths,
                         _status(radii, depths, eps / gens.scale, depth_limit), index)


def _heap_height(word, commute, g=None):
    """Longest chain of the heap of ``word`` ending at each letter's last occurrence."""
    g = {} if g is None else dict(g)
    for x in word:
        g[x] = 1 + max((h for y, h in g.items() if not commute[x, y]), default=0)
    return g


def _stabiliser_words(gens, i, gu, top):
    """Reduced words t in the orthogonal neighbours of i whose letters keep heap
    height <= top on top of a word with chain heights ``gu``.

    Returns (t, mask of right descents of t) pairs.  A word is only grown
    by letters that land at its end in normal form; ``inv`` masks the
    letters that would cancel or slide left.
    """
    commute = gens.commute
    m = gens.masks
    nb = _bits(m.comm[i])
    out = [((), 0)]
    stack = [((), 0, 0, gu)]
    while stack:
        t, inv, rd, g = stack.pop()
        for x in nb:
            if inv >> x & 1:
                continue
            h = 1 + max((v for y, v in g.items() if not commute[x, y]), default=0)
            if h > top:
                continue
            g2 = dict(g)
            g2[x] = h
            keep = m.comm[x] & m.above[x]
            w = t + (x,)
            rd2 = (1 << x) | (rd & m.comm[x])
            stack.append((w, (1 << x) | (m.comm[x] & m.below[x]) | (inv & keep), rd2, g2))
            out.append((w, rd2))
    return out


def _allowed(gens, i, rd):
    """Targets j not fixed by I_i and with no right descent of t fixing B_j."""
    cache = gens.__dict__.setdefault("_allowed", {})
    got = cache.get((i, rd))
    if got is None:
        js = _far(gens)[i]
        if rd:
            ys = _bits(rd)
            bad = gens.commute[np.ix_(ys, js)].any(axis=0) | np.isin(js, ys)
            js = js[~bad]
        got = cache[(i, rd)] = js
    return got


def _invert(gens, k, c, r, sg):
    """Image of balls (c, r) under the inversions in generators k (frame coordinates)."""
    C = gens.centers[k]
    delta = c - C
    den = np.einsum("ij,ij->i", delta, delta) - r * r
    K = gens.radii[k] ** 2 / den
    return C + K[:, None] * delta, np.abs(K) * r, np.where(den > 0, sg, -sg)


def _far(gens):
    """Letters not fixed by each generator: j not i and not orthogonal to i."""
    far = gens.__dict__.get("_far")
    if far is None:
        far = [np.flatnonzero(~gens.commute[i] & (np.arange(len(gens)) != i)) for i in range(len(gens))]
        gens.__dict__["_far"] = far
    return far


def _container_depth(w, x, commute):
    """Depth of the ball u(B_x) obtained by splitting w = u.t.x, t fixing B_x."""
    v = append_letter(w, x, commute)
    while True:
        rd = [y for y in right_descents(v, commute) if commute[x, y]]
        if not rd:
            break
        for y in rd:
            v = append_letter(v, y, commute)
    return _heap_height(v + [x], commute)[x] - 1


def _refine(gens, u, i, d):
    """Depth d+1 balls inside u(B_i) as (word, targets, letters to apply) triples.

    A child can sit in several depth d balls; it is kept only for the
    largest last letter among them, so every ball comes from one parent.
    """
    commute = gens.commute
    gu = _heap_height(u, commute)
    out = []
    for t, rd in _stabiliser_words(gens, i, gu, d + 1):
        js = _allowed(gens, i, rd)
        if not len(js):
            continue
        w = reduce(u + t + (i,), commute)
        if any(_container_depth(w, x, commute) == d for x in _bits(rd >> (i + 1) << (i + 1))):
            continue
        out.append((tuple(w), js, (i,) + tuple(reversed(u + t))))
    return out


def _children(f, p):
    return _refine(f.gens, f.words[p], f.targets[p], int(f.depths[p]))


def _images(gens, rows):
    """Apply letter sequences to pearls; rows are (target, letters) pairs."""
    js = np.array([j for j, _ in rows], dtype=int)
    width = max(len(ls) for _, ls in rows)
    L = np.full((len(rows), width), -1, dtype=int)
    for q, (_, ls) in enumerate(rows):
        L[q, :len(ls)] = ls
    c, r = gens.centers[js].copy(), gens.radii[js].copy()
    sg = np.ones(len(rows), dtype=int)
    for col in range(width):
        m = L[:, col] >= 0
        c[m], r[m], sg[m] = _invert(gens, L[m, col], c[m], r[m], sg[m])
    return c, r, sg


def _threads():
    try:
        return max(1, int(os.environ.get("SPUNPEARLS_THREADS", "1")))
    except ValueError:
        return 1


def expand_frontier(f: OrbitFrontier, gens=None, max_balls=None) -> OrbitFrontier:
    """Refine every active ball by one depth (in place; also returned).

    Children below the cutoff are DONE; children at the depth limit are
    STOPPED.  Going past ``max_balls`` raises BudgetExceeded carrying the
    frontier as it was before this generation.
    """
    if gens is not None and gens is not f.gens:
        f.gens = gens
    act = f.active
    if not len(act):
        return f
    nthreads = _threads()
    if nthreads > 1 and len(act) > 64:
        with ThreadPoolExecutor(nthreads) as ex:
            parts = list(ex.map(lambda p: _children(f, p), act.tolist()))
    else:
        parts = [_children(f, p) for p in act.tolist()]
    total = sum(len(js) for part in parts for _, js, _ in part)
    if max_balls is not None and len(f) + total > max_balls:
        raise BudgetExceeded(f"ball budget {max_balls} exceeded at generation {f.generation + 1}", f)
    f.status[act] = EXPANDED
    f.generation += 1
    if not total:
        return f
    rows, words, parents = [], [], []
    for p, part in zip(act.tolist(), parts):
        for w, js, letters in part:
            for j in js.tolist():
                rows.append((j, letters))
                words.append(w)
                parents.append(p)
    c, r, sg = _images(f.gens, rows)
    keep = []
    for q, key in enumerate(_keys(c, r)):
        if key in f.index:
            f.duplicates += 1
            continue
        f.index[key] = len(f.targets)
        keep.append(q)
        f.words.append(words[q])
        f.targets.append(rows[q][0])
        f.parents.append(parents[q])
    keep = np.array(keep, dtype=int)
    ds = f.depths[np.array(parents, dtype=int)[keep]] + 1
    f.anomalies += int(np.sum(sg[keep] < 0))
    f.centers = np.vstack([f.centers, c[keep]])
    f.radii = np.concatenate([f.radii, r[keep]])
    f.signs = np.concatenate([f.signs, sg[keep]])
    f.depths = np.concatenate([f.depths, ds])
    f.status = np.concatenate([f.status, _status(r[keep], ds, f.eps / f.gens.scale, f.depth_limit)])
    return f


def grow(gens: GeneratorSet, eps, depth_limit, max_balls=2_000_000, frontier=None) -> OrbitFrontier:
    """Refine until nothing is active."""
    f = frontier if frontier is not None else new_frontier(gens, eps, depth_limit)
    while not f.complete:
        expand_frontier(f, max_balls=max_balls)
    return f


def word_order(f: OrbitFrontier, ks):
    return sorted(ks, key=lambda k: f.word(k))


def cloud(f: OrbitFrontier) -> np.ndarray:
    """Centers of the balls below the cutoff, word-lexicographic, original coordinates."""
    ks = word_order(f, np.flatnonzero(f.status == DONE).tolist())
    if not ks:
        return np.zeros((0, 4))
    return f.gens.from_frame(f.centers[ks])


def limit_set_points(sn, eps, depth_limit, max_balls=2_000_000, gens=None) -> np.ndarray:
    if not eps > 0:
        raise InvalidEpsilon(f"epsilon must be positive, got {eps!r}")
    gens = gens if gens is not None else generators_from_necklace(sn)
    return cloud(grow(gens, eps, depth_limit, max_balls))


def max_depth_complete(f: OrbitFrontier) -> int:
    """Largest k such that every ball of depth <= k has been generated."""
    open_ = np.flatnonzero(f.status != EXPANDED)
    if not len(open_):
        return int(f.depths.max()) + 1
    return int(min(f.depths[open_].min(), f.depth_limit))


def shell(f: OrbitFrontier, k):
    """Indices of the balls of depth k."""
    if k > max_depth_complete(f):
        raise InsufficientDepth(f"frontier only complete to depth {max_depth_complete(f)}, asked {k}")
    return np.flatnonzero(f.depths == k)


def containment_margin(f: OrbitFrontier, k) -> float:
    """Worst nesting of depth k+1 balls in depth k balls.

    For each inner ball the best margin r_out - |dc| - r_in over outer
    balls is taken, relative to r_in; the minimum over inner balls is
    returned.  A value >= 0 means every ball nests.
    """
    from scipy.spatial import cKDTree

    inner = shell(f, k + 1)
    outer = shell(f, k)
    if not len(inner):
        return float("inf")
    oc, orad = f.centers[outer], f.radii[outer]
    tree = cKDTree(oc)
    reach = float(orad.max())
    worst = np.inf
    for q in inner:
        cand = tree.query_ball_point(f.centers[q], reach)
        if not cand:
            return -np.inf
        d = np.linalg.norm(oc[cand] - f.centers[q], axis=1)
        m = (orad[cand] - d - f.radii[q]) / f.radii[q]
        worst = min(worst, float(m.max()))
    return worst


def invariance_defect(pts, gens: GeneratorSet) -> float:
    """Largest distance from a reflected cloud point to the cloud, over all generators."""
    from scipy.spatial import cKDTree

    pts = np.asarray(pts, float)
    if not len(pts):
        return float("inf")
    tree = cKDTree(pts)
    worst = 0.0
    for s in gens.spheres:
        c, R = s.center, s.radius
        delta = pts - c
        d2 = np.einsum("ij,ij->i", delta, delta)
        img = c + (R * R / d2)[:, None] * delta
        worst = max(worst, float(tree.query(img)[0].max()))
    return worst


def parent_margin(f: OrbitFrontier) -> float:
    """Worst nesting of each refined ball in the ball it was refined from, relative to its radius."""
    ks = np.flatnonzero(np.asarray(f.parents) >= 0)
    if not len(ks):
        return float("inf")
    ps = np.asarray(f.parents)[ks]
    d = np.linalg.norm(f.centers[ks] - f.centers[ps], axis=1)
    return float(np.min((f.radii[ps] - d - f.radii[ks]) / f.radii[ks]))


# ---------------------------------------------------------------- counts

def closed_form_counts(n: int, k: int) -> dict:
    """Closed forms for packings of an n-pearl necklace, exact integers."""
    if n < 3:
        raise ValueError("the closed forms need n >= 3")
    return {
        "layer1": n * (n - 2),
        "layer2": n * (n * n - 2 * n + 7),
        "copies": n * (((n - 1) ** k - 1) // (n - 2)) + 1,
        "shell": 2 * n * (n - 3) ** k,
    }


def count_balls(gens: GeneratorSet, k: int) -> list:
    """Number of balls u(B_i) of each depth 0..k, from the words alone.

    Each ball is refined into the balls of the next depth that it is the
    chosen parent of, so nothing is visited twice and the last depth is
    only counted.
    """
    level = [((), i) for i in range(len(gens))]
    counts = [len(level)]
    for d in range(k):
        last = d == k - 1
        nxt, total = [], 0
        for u, i in level:
            for w, js, _ in _refine(gens, u, i, d):
                total += len(js)
                if not last:
                    nxt.extend((w, int(j)) for j in js)
        counts.append(total)
        level = nxt
    return counts


def count_report(f: OrbitFrontier, n=None, k=None) -> dict:
    """Enumerated ball counts per depth next to the closed forms.  Nothing is asserted.

    ``per_depth`` comes from the deduplicated geometric enumeration and
    ``words`` from counting canonical words, which needs no geometry.
    """
    n = len(f.gens) if n is None else n
    top = max_depth_complete(f)
    k = top if k is None else k
    per = [int(np.sum(f.depths == d)) for d in range(min(k, top) + 1)]
    words = count_balls(f.gens, k)
    cum = [int(x) for x in np.cumsum(words)]
    rep = {"n": n, "k": k, "per_depth": per, "words": words, "cumulative": cum,
           "closed_forms": closed_form_counts(n, k), "duplicates": f.duplicates}
    rep["agree"] = {
        "layer1": len(cum) > 1 and cum[1] == rep["closed_forms"]["layer1"],
        "layer2": len(cum) > 2 and cum[2] == rep["closed_forms"]["layer2"],
        "shell": words[-1] == rep["closed_forms"]["shell"],
    }
    return rep


def format_count_report(rep) -> str:
    lines = [f"n = {rep['n']}, k = {rep['k']}", "depth  enumerated       words  cumulative"]
    for d, (b, c) in enumerate(zip(rep["words"], rep["cumulative"])):
        a = rep["per_depth"][d] if d < len(rep["per_depth"]) else None
        a = "-" if a is None else str(a)
        lines.append(f"{d:5d}  {a:>10}  {b:10d}  {c:10d}")
    lines.append("closed forms:")
    for key, v in rep["closed_forms"].items():
        flag = rep["agree"].get(key)
        note = "" if flag is None else ("  (agrees)" if flag else "  (differs)")
        lines.append(f"  {key} = {v}{note}")
    return "\n".join(lines)


# ---------------------------------------------------------------- checkpoints

def save_checkpoint(f: OrbitFrontier, path):
    """Write the frontier as versioned JSON: words as index lists, spheres as 6 reals."""
    balls = []
    for k in range(len(f)):
        c = f.gens.from_frame(f.centers[k])
        r = float(f.radii[k] * f.gens.scale)
        balls.append({"word": list(f.word(k)), "parent": f.parents[k],
                      "sphere": (int(f.signs[k]) * _ball_vector(c, r)).tolist(),
                      "center": c.tolist(), "radius": r, "sign": int(f.signs[k]),
                      "depth": int(f.depths[k]), "status": int(f.status[k])})
    doc = {"format": CHECKPOINT_FORMAT, "version": CHECKPOINT_VERSION, "eps": f.eps,
           "depth_limit": f.depth_limit, "generation": f.generation, "n": len(f.gens),
           "duplicates": f.duplicates, "anomalies": f.anomalies, "balls": balls}
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_checkpoint(path, gens: GeneratorSet) -> OrbitFrontier:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != CHECKPOINT_FORMAT or doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: not a version {CHECKPOINT_VERSION} checkpoint")
    if doc["n"] != len(gens):
        raise ValueError(f"{path}: checkpoint has {doc['n']} generators, expected {len(gens)}")
    b = doc["balls"]
    centers = gens.to_frame(np.array([x["center"] for x in b], float).reshape(-1, 4))
    radii = np.array([x["radius"] for x in b], float) / gens.scale
    f = OrbitFrontier(gens, doc["eps"], doc["depth_limit"],
                      [tuple(x["word"][:-1]) for x in b], [x["word"][-1] for x in b],
                      [x["parent"] for x in b], centers, radii,
                      np.array([x["sign"] for x in b], dtype=int),
                      np.array([x["depth"] for x in b], dtype=int),
                      np.array([x["status"] for x in b], dtype=int), {},
                      doc["generation"], doc["duplicates"], doc["anomalies"])
    f.index = {key: k for k, key in enumerate(_keys(f.centers, f.radii))}
    return f


# ---------------------------------------------------------------- Poincare hypotheses

@dataclass
class PoincareReport:
    angles: list = field(default_factory=list)       # (i, j, kind, angle or None, ok)
    face_pairing: list = field(default_factory=list)  # indices whose reflection moves its face
    triples: int = 0
    bad_triples: list = field(default_factory=list)

    @property
    def failures(self):
        return [a for a in self.angles if not a[4]]

    @property
    def passed(self):
        return not self.failures and not self.face_pairing and not self.bad_triples


def dihedral_angle(c1, r1, c2, r2):
    """Angle between two crossing spheres from the triangle center-center-intersection."""
    d = float(np.linalg.norm(np.asarray(c1, float) - np.asarray(c2, float)))
    cosv = (r1 * r1 + r2 * r2 - d * d) / (2 * r1 * r2)
    return float(np.arccos(np.clip(cosv, -1, 1)))


def poincare_check(sn, tol=1e-6) -> PoincareReport:
    rep = PoincareReport()
    c = sn.centers
    r = sn.radii
    n = len(sn)
    adj = sn.adjacency
    crossing = {i: set() for i in range(n)}
    for i in range(n):
        d = np.linalg.norm(c[i + 1:] - c[i], axis=1)
        for off in np.flatnonzero(d < r[i + 1:] + r[i] * (1 + tol)):
            j = i + 1 + int(off)
            decl = adj.get((i, j))
            if decl == PairType.TANGENT:
                gap = abs(d[off] - r[i] - r[j]) / (r[i] + r[j])
                rep.angles.append((i, j, "tangent", 0.0, gap <= tol))
                continue
            ang = dihedral_angle(c[i], r[i], c[j], r[j])
            ok = decl == PairType.ORTHOGONAL and abs(ang - np.pi / 2) <= tol
            rep.angles.append((i, j, "crossing", ang, ok))
            crossing[i].add(j)
            crossing[j].add(i)
    for i in range(n):
        m = inversion_in(sn.spheres[i])
        if not same_sphere(map_sphere(m, sn.spheres[i]), sn.spheres[i], 1e-9):
            rep.face_pairing.append(i)
    for i in range(n):
        for j in crossing[i]:
            if j <= i:
                continue
            for k in crossing[i] & crossing[j]:
                if k <= j:
                    continue
                rep.triples += 1
                G = np.eye(3)
                for a, b, (x, y) in ((0, 1, (i, j)), (0, 2, (i, k)), (1, 2, (j, k))):
                    dd = np.linalg.norm(c[x] - c[y])
                    G[a, b] = G[b, a] = (r[x] ** 2 + r[y] ** 2 - dd * dd) / (2 * r[x] * r[y])
                if np.linalg.eigvalsh(G).min() <= tol:
                    rep.bad_triples.append((i, j, k))
    return rep
