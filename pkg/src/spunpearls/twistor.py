"""Quaternionic Moebius maps and the twistor projection P^3_C -> S^4.

R^4 is identified with H by x -> x1 + x2 i + x3 j + x4 k.  A quaternion
p = z + w j (z, w complex) acts on C^2 by the block [[z, w], [-conj w, conj z]];
with that block, left multiplication is complex linear when vectors of H^2
are read as q = z1 - j z2, q' = z3 - j z4, and the complex scalars act on
the right.  Every op below shares this convention.

A reflection is anti-holomorphic: I(q) = M(conj q).  Only even words lift.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotABall, NotLiftable, OddWord
from .inversive import INF, InversiveSphere, apply, is_inf, reframe
from .orbit import word_map

ONE = np.array([1.0, 0.0, 0.0, 0.0])
ZERO = np.zeros(4)


# ---------------------------------------------------------------- quaternions

def qmul(p, q):
    """Hamilton product, broadcasting over leading axes."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    a1, b1, c1, d1 = np.moveaxis(p, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(q, -1, 0)
    return np.stack([a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
                     a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
                     a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
                     a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2], axis=-1)


def qconj(q):
    q = np.asarray(q, float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm2(q):
    q = np.asarray(q, float)
    return np.sum(q * q, axis=-1)


def qinv(q):
    return qconj(q) / qnorm2(q)[..., None]


def quat_to_pair(p):
    """p = z + w j -> (z, w)."""
    p = np.asarray(p, float)
    return p[..., 0] + 1j * p[..., 1], p[..., 2] + 1j * p[..., 3]


def vector_to_c2(q):
    """q = z - j w -> (z, w); the coordinates of a vector entry."""
    q = np.asarray(q, float)
    return q[..., 0] + 1j * q[..., 1], -q[..., 2] + 1j * q[..., 3]


def c2_to_vector(z, w):
    z = np.asarray(z, complex)
    w = np.asarray(w, complex)
    return np.stack([z.real, z.imag, -w.real, w.imag], axis=-1)


# ---------------------------------------------------------------- quaternionic Moebius maps

@dataclass(frozen=True)
class QMoebius:
    """x -> (a y + b)(c y + d)^-1 with y = conj x when ``conjugating``.

    ``matrix`` has shape (2, 2, 4).  For a conjugating map m = M o conj,
    ``partner`` is the left form of conj o m, which lets two conjugating
    maps compose into a holomorphic one.
    """

    matrix: np.ndarray
    conjugating: bool = False
    partner: np.ndarray | None = None

    def __call__(self, x):
        if is_inf(x):
            y = None
        else:
            y = np.asarray(x, float)
            if self.conjugating:
                y = qconj(y)
        (a, b), (c, d) = self.matrix
        if y is None:
            num, den = a, c
        else:
            num, den = qmul(a, y) + b, qmul(c, y) + d
        if qnorm2(den) <= 1e-28 * max(1.0, qnorm2(num)):
            return INF
        return qmul(num, qinv(den))

    def __matmul__(self, other: "QMoebius") -> "QMoebius":
        """self after other."""
        if not self.conjugating:
            return QMoebius(qmatmul(self.matrix, other.matrix), other.conjugating)
        if not other.conjugating:
            raise NotLiftable("an anti-map after a holomorphic map has no left form here")
        if other.partner is None:
            raise NotLiftable("composing anti-maps needs the partner form of the right factor")
        return QMoebius(qmatmul(self.matrix, other.partner), False)

    def complex_det(self) -> float:
        return abs(np.linalg.det(block_embed(self.matrix)))


def qmatmul(A, B):
    """Product of (2, 2, 4) quaternionic matrices."""
    out = np.zeros((2, 2, 4))
    for i in range(2):
        for k in range(2):
            out[i, k] = qmul(A[i, 0], B[0, k]) + qmul(A[i, 1], B[1, k])
    return out


def qidentity() -> QMoebius:
    return QMoebius(np.array([[ONE, ZERO], [ZERO, ONE]]))


def inversion_as_qmoebius(s: InversiveSphere) -> QMoebius:
    """I(q) = c + r^2 (conj q - conj c)^-1, matrix [[c, r^2 - |c|^2], [1, -conj c]] on conj q."""
    if s.is_plane:
        raise NotABall("inversion in a hyperplane has no finite center")
    c, r = np.asarray(s.center, float), s.radius
    k = (r * r - c @ c) * ONE
    M = np.array([[c, k], [ONE, -qconj(c)]])
    N = np.array([[qconj(c), k], [ONE, -c]])
    return QMoebius(M, True, N)


def even_word_to_qmoebius(word, gens, frame=True) -> QMoebius:
    """Product of the generator anti-maps along an even word (holomorphic)."""
    word = list(word)
    if len(word) % 2:
        raise OddWord(f"word of length {len(word)} is odd; only even words lift")
    out = qidentity()
    for x, y in zip(word[::2], word[1::2]):
        sx, sy = gens.spheres[x], gens.spheres[y]
        if frame:
            sx, sy = reframe(sx, gens.shift, gens.scale), reframe(sy, gens.shift, gens.scale)
        out = out @ (inversion_as_qmoebius(sx) @ inversion_as_qmoebius(sy))
    return out


def block_embed(matrix) -> np.ndarray:
    """(2, 2, 4) quaternionic matrix -> 4x4 complex, entry p = z + w j -> [[z, w], [-conj w, conj z]]."""
    out = np.zeros((4, 4), complex)
    for i in range(2):
        for k in range(2):
            z, w = quat_to_pair(matrix[i, k])
            out[2 * i:2 * i + 2, 2 * k:2 * k + 2] = [[z, w], [-np.conj(w), np.conj(z)]]
    return out


def qmoebius_to_complex4(m: QMoebius) -> np.ndarray:
    if m.conjugating:
        raise NotLiftable("anti-holomorphic maps (odd words) do not lift to P^3_C")
    return block_embed(m.matrix)


# ---------------------------------------------------------------- projective space

def normalize_projective(Z):
    """Unit vector with the first coordinate of modulus > 1e-8 made real positive."""
    Z = np.asarray(Z, complex)
    nrm = np.linalg.norm(Z)
    if nrm == 0:
        raise ValueError("the zero vector is not a point of P^3")
    Z = Z / nrm
    k = int(np.argmax(np.abs(Z) > 1e-8))
    return Z * (abs(Z[k]) / Z[k])


def fubini_study(Z1, Z2) -> float:
    Z1 = np.asarray(Z1, complex)
    Z2 = np.asarray(Z2, complex)
    c = abs(np.vdot(Z1, Z2)) / (np.linalg.norm(Z1) * np.linalg.norm(Z2))
    return float(np.arccos(min(1.0, c)))


def twistor_project(Z):
    """[z1:z2:z3:z4] -> q1 q2^-1 with q1 = z1 - j z2, q2 = z3 - j z4; INF on the q2 = 0 chart."""
    Z = np.asarray(Z, complex)
    q1 = c2_to_vector(Z[0], Z[1])
    q2 = c2_to_vector(Z[2], Z[3])
    if qnorm2(q2) <= 1e-24 * max(qnorm2(q1), 1e-300):
        return INF
    return qmul(q1, qinv(q2))


def right_j(Z):
    """Right multiplication by j, (z, w) -> (conj w, -conj z) on each pair."""
    Z = np.asarray(Z, complex)
    return np.array([np.conj(Z[1]), -np.conj(Z[0]), np.conj(Z[3]), -np.conj(Z[2])])


def lift_point(x):
    """A vector over x: (x, 1) in H^2."""
    if is_inf(x):
        return np.array([1, 0, 0, 0], complex)
    z, w = vector_to_c2(x)
    return np.array([z, w, 1.0, 0.0], complex)


def fiber_points(x, k, rng):
    """k random points of the fiber over x (complex combinations of Z and Z j)."""
    Z = lift_point(x)
    Zj = right_j(Z)
    ab = rng.normal(size=(k, 2)) + 1j * rng.normal(size=(k, 2))
    return [normalize_projective(a * Z + b * Zj) for a, b in ab]


def chordal(x, y) -> float:
    """Chordal distance on S^4 = R^4 + INF."""
    if is_inf(x) and is_inf(y):
        return 0.0
    if is_inf(x) or is_inf(y):
        p = y if is_inf(x) else x
        return float(2.0 / np.sqrt(1.0 + p @ p))
    d = np.asarray(x) - np.asarray(y)
    return float(2.0 * np.sqrt(d @ d) / np.sqrt((1.0 + x @ x) * (1.0 + y @ y)))


def equivariance_check(word, gens, samples=100, rng=None) -> float:
    """Max chordal distance between pi(lift(w) Z) and w(pi(Z)) over random Z."""
    rng = np.random.default_rng(0) if rng is None else rng
    if not len(word):
        return 0.0
    L = qmoebius_to_complex4(even_word_to_qmoebius(word, gens))
    m = word_map(gens, word, frame=True)
    worst = 0.0
    for _ in range(samples):
        Z = normalize_projective(rng.normal(size=4) + 1j * rng.normal(size=4))
        up = twistor_project(L @ Z)
        down = apply(m, twistor_project(Z))
        worst = max(worst, chordal(up, down))
    return worst


def fiber_check(word, gens, fibers=50, per_fiber=3, rng=None) -> float:
    """Max distance of lifted fiber points from the fiber over the image point."""
    rng = np.random.default_rng(1) if rng is None else rng
    L = qmoebius_to_complex4(even_word_to_qmoebius(word, gens))
    m = word_map(gens, word, frame=True)
    worst = 0.0
    for _ in range(fibers):
        x = rng.normal(size=4)
        target = apply(m, x)
        for Z in fiber_points(x, per_fiber, rng):
            worst = max(worst, chordal(twistor_project(L @ Z), target))
    return worst


def right_line_defect(L, Z) -> float:
    """|L (Z j) - (L Z) j|: lifted maps commute with right multiplication by j."""
    return float(np.max(np.abs(L @ right_j(Z) - right_j(L @ Z))))
