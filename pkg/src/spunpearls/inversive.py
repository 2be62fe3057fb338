"""Conformal geometry of S^4 = R^4 + {inf} in inversive coordinates.

A point x of R^4 lifts to the light vector

    X = (x, (|x|^2 - 1)/2, (|x|^2 + 1)/2)

of Minkowski space R^{5,1} with form J = diag(1, 1, 1, 1, 1, -1), and inf
lifts to (0, 0, 0, 0, 1, 1).  A round sphere with center c and radius r is
the unit spacelike vector

    s = (c/r, (|c|^2 - r^2 - 1)/(2r), (|c|^2 - r^2 + 1)/(2r))

which satisfies <X, s>_J = (r^2 - |x - c|^2) / (2r), positive inside the
ball.  Hyperplanes n.x = d are (n, d, d).  Conformal maps act linearly as
Lorentz matrices.

Spheres built from a center and radius keep those values alongside the
vector.  Far from the origin the vector entries grow like |c|^2/r, so the
ball data is used whenever it is available for products and inversions.
"""
from __future__ import annotations

import enum

import numpy as np

from .errors import InvalidHalfSpace, InvalidRadius, NotABall, NotInPage

J = np.diag([1.0, 1.0, 1.0, 1.0, 1.0, -1.0])
INFINITY_THRESHOLD = 1e-14


class _Infinity:
    """The point at infinity of S^4 (a singleton)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(p) -> bool:
    return p is INF


def as_point(p):
    """Coerce to a finite point (4-vector) or pass INF through."""
    if p is INF:
        return INF
    a = np.asarray(p, dtype=float).reshape(-1)
    if a.shape == (3,):
        a = np.append(a, 0.0)
    if a.shape != (4,) or not np.all(np.isfinite(a)):
        raise ValueError(f"not a point of R^4: {p!r}")
    return a


def minkowski(u, v):
    """The form <u, v>_J, broadcasting over leading axes."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return (u[..., :5] * v[..., :5]).sum(axis=-1) - u[..., 5] * v[..., 5]


def lift(p) -> np.ndarray:
    if p is INF:
        return np.array([0.0, 0.0, 0.0, 0.0, 1.0, 1.0])
    x = as_point(p)
    n2 = x @ x
    return np.concatenate([x, [(n2 - 1.0) / 2.0, (n2 + 1.0) / 2.0]])


def project(v, threshold=INFINITY_THRESHOLD):
    """Point of S^4 represented by the light vector ``v``.

    Returns INF when the normalizing coordinate v[5] - v[4] is below
    ``threshold`` relative to the size of ``v``.
    """
    v = np.asarray(v, dtype=float)
    k = v[5] - v[4]
    if abs(k) <= threshold * np.max(np.abs(v)):
        return INF
    return v[:4] / k


class InversiveSphere:
    """An oriented round 3-sphere (or hyperplane) of S^4.

    ``vector`` is the unit spacelike vector in R^{5,1}.  ``sign`` is +1 when
    the positive side is the bounded ball and -1 when it is the exterior.
    """

    __slots__ = ("vector", "_center", "_radius", "_sign")

    def __init__(self, vector, center=None, radius=None, sign=1):
        v = np.array(vector, dtype=float).reshape(6)
        v.setflags(write=False)
        self.vector = v
        if center is not None:
            c = np.array(center, dtype=float).reshape(4)
            c.setflags(write=False)
            self._center, self._radius, self._sign = c, float(radius), int(sign)
        else:
            k = v[5] - v[4]
            if abs(k) <= 1e-12 * max(1.0, np.max(np.abs(v))):
                self._center, self._radius, self._sign = None, None, 1
            else:
                c = v[:4] / k
                c.setflags(write=False)
                self._center, self._radius = c, 1.0 / abs(k)
                self._sign = 1 if k > 0 else -1

    @property
    def is_plane(self) -> bool:
        return self._center is None

    @property
    def center(self) -> np.ndarray:
        if self._center is None:
            raise NotABall("hyperplane has no finite center")
        return self._center

    @property
    def radius(self) -> float:
        if self._center is None:
            raise NotABall("hyperplane has no radius")
        return self._radius

    @property
    def sign(self) -> int:
        return self._sign

    def flipped(self) -> "InversiveSphere":
        if self.is_plane:
            return InversiveSphere(-self.vector)
        return InversiveSphere(-self.vector, self._center, self._radius, -self._sign)

    def __repr__(self):
        if self.is_plane:
            return f"InversiveSphere(plane, vector={self.vector.tolist()})"
        return f"InversiveSphere(center={self._center.tolist()}, radius={self._radius!r})"


def _ball_vector(c, r):
    n2 = c @ c
    return np.concatenate([c / r, [(n2 - r * r - 1.0) / (2 * r), (n2 - r * r + 1.0) / (2 * r)]])


def sphere_from_center_radius(c, r) -> InversiveSphere:
    c = as_point(c)
    if c is INF:
        raise ValueError("center must be finite")
    r = float(r)
    if not r > 0 or not np.isfinite(r):
        raise InvalidRadius(f"radius must be positive, got {r!r}")
    return InversiveSphere(_ball_vector(c, r), c, r, 1)


def plane_sphere(normal, offset=0.0) -> InversiveSphere:
    """The hyperplane normal . x = offset, positive side normal . x < offset."""
    n = np.asarray(normal, dtype=float).reshape(4)
    scale = np.linalg.norm(n)
    n = n / scale
    d = float(offset) / scale
    return InversiveSphere(np.concatenate([n, [d, d]]))


def center_radius_of(s: InversiveSphere):
    if s.is_plane:
        raise NotABall("hyperplane encodings have no finite center")
    return s.center.copy(), s.radius


def pair_inner(s1: InversiveSphere, s2: InversiveSphere) -> float:
    """Inversive product (d^2 - r1^2 - r2^2) / (2 r1 r2) of two spheres.

    0 for orthogonal spheres, +1 for external tangency, > 1 for disjoint
    balls.  This is minus the J-form of the two vectors.
    """
    if not s1.is_plane and not s2.is_plane:
        d = s1.center - s2.center
        r1, r2 = s1.radius, s2.radius
        return s1.sign * s2.sign * ((d @ d) - r1 * r1 - r2 * r2) / (2.0 * r1 * r2)
    return -float(minkowski(s1.vector, s2.vector))


def inner_matrix(centers, radii) -> np.ndarray:
    """All pairwise inversive products of a family of balls."""
    c = np.asarray(centers, dtype=float)
    r = np.asarray(radii, dtype=float)
    diff = c[:, None, :] - c[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    return (d2 - r[:, None] ** 2 - r[None, :] ** 2) / (2.0 * r[:, None] * r[None, :])


class PairType(enum.Enum):
    ORTHOGONAL = "orthogonal"
    TANGENT = "tangent"
    DISJOINT = "disjoint"
    OVERLAPPING = "overlapping"
    EQUAL = "equal"


def same_sphere(s1, s2, tol=1e-9) -> bool:
    """Unoriented equality (s ~ -s)."""
    if s1.is_plane != s2.is_plane:
        return False
    if s1.is_plane:
        return (np.max(np.abs(s1.vector - s2.vector)) <= tol
                or np.max(np.abs(s1.vector + s2.vector)) <= tol)
    scale = max(s1.radius, s2.radius)
    return (np.linalg.norm(s1.center - s2.center) <= tol * scale
            and abs(s1.radius - s2.radius) <= tol * scale)


def classify_value(ip: float, tol=1e-6) -> PairType:
    a = abs(ip)
    if a <= tol:
        return PairType.ORTHOGONAL
    if abs(a - 1.0) <= tol:
        return PairType.TANGENT
    if ip > 1.0:
        return PairType.DISJOINT
    # |ip| < 1 crossing spheres, ip < -1 nested balls
    return PairType.OVERLAPPING


def classify_pair(s1, s2, tol=1e-6) -> PairType:
    if same_sphere(s1, s2, tol):
        return PairType.EQUAL
    return classify_value(pair_inner(s1, s2), tol)


class MoebiusMap:
    """A conformal map of S^4 as a Lorentz matrix plus orientation parity.

    Single inversions remember their mirror so points and spheres can be
    mapped with the pointwise formula instead of the (possibly
    ill-conditioned) matrix.
    """

    __slots__ = ("matrix", "parity", "mirror")

    def __init__(self, matrix, parity=None, mirror=None):
        m = np.array(matrix, dtype=float).reshape(6, 6)
        m.setflags(write=False)
        self.matrix = m
        if parity is None:
            parity = 1 if np.linalg.det(m) > 0 else -1
        self.parity = int(parity)
        self.mirror = mirror

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return compose(self, other)

    def __repr__(self):
        kind = "inversion" if self.mirror is not None else "map"
        return f"MoebiusMap({kind}, parity={self.parity:+d})"


def identity_map() -> MoebiusMap:
    return MoebiusMap(np.eye(6), 1)


def compose(m1: MoebiusMap, m2: MoebiusMap) -> MoebiusMap:
    """m1 after m2."""
    return MoebiusMap(m1.matrix @ m2.matrix, m1.parity * m2.parity)


def inverse(m: MoebiusMap) -> MoebiusMap:
    if m.mirror is not None:
        return m
    return MoebiusMap(J @ m.matrix.T @ J, m.parity)


def lorentz_defect(m: MoebiusMap) -> float:
    """max |L^T J L - J|."""
    L = m.matrix
    return float(np.max(np.abs(L.T @ J @ L - J)))


def matrix_distance(a, b) -> float:
    a = a.matrix if isinstance(a, MoebiusMap) else np.asarray(a)
    b = b.matrix if isinstance(b, MoebiusMap) else np.asarray(b)
    return float(np.max(np.abs(a - b)))


def inversion_in(s: InversiveSphere) -> MoebiusMap:
    v = s.vector
    L = np.eye(6) - 2.0 * np.outer(v, J @ v)
    return MoebiusMap(L, -1, mirror=s)


def invert_point(s: InversiveSphere, p):
    """Image of ``p`` under inversion in ``s`` (pointwise formula)."""
    if s.is_plane:
        if p is INF:
            return INF
        x = as_point(p)
        n, d = s.vector[:4], s.vector[4]
        return x - 2.0 * (x @ n - d) * n
    c, R = s.center, s.radius
    if p is INF:
        return c.copy()
    x = as_point(p)
    delta = x - c
    d2 = delta @ delta
    if d2 <= (INFINITY_THRESHOLD * R) ** 2:
        return INF
    return c + (R * R / d2) * delta


def invert_ball(s: InversiveSphere, center, radius):
    """Image of the ball (center, radius) under inversion in the finite sphere s.

    Returns (center', radius', sign'), where sign' is -1 when the mirror's
    center lies inside the ball so the image of the ball is an exterior.
    """
    c, R = s.center, s.radius
    delta = np.asarray(center, dtype=float) - c
    den = delta @ delta - radius * radius
    k = R * R / den
    return c + k * delta, abs(k) * radius, (1 if den > 0 else -1)


def apply(m: MoebiusMap, p):
    """Action of ``m`` on a point of S^4."""
    if m.mirror is not None:
        return invert_point(m.mirror, p)
    return project(m.matrix @ lift(p))


def map_sphere(m: MoebiusMap, s: InversiveSphere) -> InversiveSphere:
    """Image of an oriented sphere."""
    mir = m.mirror
    if mir is not None and not mir.is_plane and not s.is_plane:
        delta = s.center - mir.center
        den = delta @ delta - s.radius ** 2
        if abs(den) > 1e-12 * max(s.radius, mir.radius) ** 2:
            c, r, sg = invert_ball(mir, s.center, s.radius)
            sg *= s.sign
            return InversiveSphere(sg * _ball_vector(c, r), c, r, sg)
    return InversiveSphere(m.matrix @ s.vector)


def spin_point(x, theta: float) -> np.ndarray:
    """Rotate a point of the page R^3_+ about the plane R^2 by ``theta``."""
    a = np.asarray(x, dtype=float).reshape(-1)
    if a.shape == (4,):
        if a[3] != 0.0:
            raise NotInPage(f"point {a.tolist()} is not in the page x4 = 0")
        a = a[:3]
    if a.shape != (3,):
        raise ValueError(f"expected a point of R^3_+, got {x!r}")
    if a[2] < 0:
        raise InvalidHalfSpace(f"x3 = {a[2]!r} < 0")
    return np.array([a[0], a[1], a[2] * np.cos(theta), a[2] * np.sin(theta)])


def spin_sphere(s: InversiveSphere, theta: float, tol=1e-12) -> InversiveSphere:
    c, r = center_radius_of(s)
    if abs(c[3]) > tol * max(1.0, r):
        raise NotInPage(f"sphere center {c.tolist()} is not in the page x4 = 0")
    c = c.copy()
    c[3] = 0.0
    return sphere_from_center_radius(spin_point(c, theta), r)


def reframe(s: InversiveSphere, shift, scale: float) -> InversiveSphere:
    """Sphere in the coordinates x' = (x - shift) / scale."""
    if s.is_plane:
        n, d = s.vector[:4], s.vector[4]
        return plane_sphere(n, (d - n @ np.asarray(shift, float)) / scale)
    c = (s.center - np.asarray(shift, float)) / scale
    r = s.radius / scale
    return InversiveSphere(s.sign * _ball_vector(c, r), c, r, s.sign)


def gram_psd(spheres, tol=1e-9) -> bool:
    """True when the spheres have a common point.

    A family of spheres meets iff the J-Gram matrix of their vectors is
    positive semidefinite (the orthogonal complement then contains a light
    vector).  Entries are taken from the stable inversive products.
    """
    n = len(spheres)
    G = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            G[i, j] = G[j, i] = -pair_inner(spheres[i], spheres[j])
    return bool(np.min(np.linalg.eigvalsh(G)) >= -tol)
