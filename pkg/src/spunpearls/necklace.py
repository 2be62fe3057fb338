"""Semi-necklaces in the half-space R^3_+ and their spun necklaces in S^4.

A semi-necklace is a chain of balls in the page x4 = 0, x3 >= 0 whose
consecutive members are orthogonal and whose other members are disjoint.
Spinning it about the plane R^2 in six steps of 60 degrees gives six
meridian copies of every pearl; two pole pearls cap the ends and a junction
pearl fills each square gap between two consecutive levels.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import ConstructionInfeasible, EmptyNecklace, OverlapViolation
from .inversive import (
    InversiveSphere,
    PairType,
    classify_value,
    gram_psd,
    inner_matrix,
    pair_inner,
    sphere_from_center_radius,
    spin_sphere,
)

MERIDIANS = 6
SQRT2 = np.sqrt(2.0)

# declared relation codes used in reports
ORTH, TANG, DISJ = 0, 1, 2
_DECLARED = {ORTH: PairType.ORTHOGONAL, TANG: PairType.TANGENT, DISJ: PairType.DISJOINT}


# ---------------------------------------------------------------- semi

@dataclass(frozen=True)
class SemiNecklace:
    """Ordered pearls in the page x4 = 0.  Endpoints are the first and last pearls."""

    centers: np.ndarray
    radii: np.ndarray
    name: str = ""
    labels: tuple = ()

    def __post_init__(self):
        c = np.array(self.centers, dtype=float)
        if c.ndim == 2 and c.shape[1] == 3:
            c = np.hstack([c, np.zeros((len(c), 1))])
        r = np.array(self.radii, dtype=float).reshape(-1)
        c = c.reshape(len(r), 4) if len(r) else np.zeros((0, 4))
        c.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"S{k + 1}" for k in range(len(r))))

    def __len__(self):
        return len(self.radii)

    @property
    def endpoints(self):
        return (0, len(self) - 1)

    def spheres(self):
        return [sphere_from_center_radius(c, r) for c, r in zip(self.centers, self.radii)]

    def replace(self, centers=None, radii=None, name=None):
        return SemiNecklace(self.centers if centers is None else centers,
                            self.radii if radii is None else radii,
                            self.name if name is None else name, self.labels)


def _canonical_rows(pearls):
    return json.dumps([list(map(float, p["center"])) + [float(p["radius"])] for p in pearls],
                      separators=(",", ":"))


def table_checksum(pearls) -> str:
    return "sha256:" + hashlib.sha256(_canonical_rows(pearls).encode()).hexdigest()


def load_trefoil_table() -> SemiNecklace:
    """The bundled 85-pearl trefoil semi-necklace, digits as printed."""
    text = resources.files("spunpearls").joinpath("data/trefoil85.json").read_text()
    doc = json.loads(text)
    pearls = doc["pearls"]
    if table_checksum(pearls) != doc["checksum"]:
        raise RuntimeError("bundled trefoil table failed its checksum")
    return SemiNecklace([p["center"] for p in pearls], [p["radius"] for p in pearls],
                        doc["name"], tuple(p["label"] for p in pearls))


# ---------------------------------------------------------------- reports

@dataclass
class PairRecord:
    i: int
    j: int
    declared: PairType
    observed: PairType
    value: float
    ok: bool
    violation: str | None = None


@dataclass
class NecklaceReport:
    """Pairwise classification of a necklace.

    ``pairs`` lists every unordered pair once.  ``values`` holds the
    inversive product, except for consecutive pairs of a semi-necklace where
    it holds the relative residual |d^2 - r1^2 - r2^2| / (r1^2 + r2^2).
    """

    pairs: np.ndarray
    declared: np.ndarray
    values: np.ndarray
    ok: np.ndarray
    tol: float
    clauses: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.ok.all()) and all(self.clauses.values())

    @property
    def worst_residual(self) -> float:
        return max([0.0] + [float(v) for v in self.residuals.values()])

    def _observed(self, k):
        d, v = int(self.declared[k]), float(self.values[k])
        if d == ORTH and "semi" in self.notes:
            return PairType.ORTHOGONAL if v <= self.tol else PairType.OVERLAPPING
        return classify_value(v, self.tol)

    def record(self, k) -> PairRecord:
        i, j = (int(x) for x in self.pairs[k])
        d = int(self.declared[k])
        obs = self._observed(k)
        ok = bool(self.ok[k])
        violation = None
        if not ok:
            if d == ORTH:
                violation = "OrthogonalityViolation"
            elif d == TANG:
                violation = "TangencyViolation"
            elif obs == PairType.TANGENT:
                violation = "UndeclaredTangency"
            else:
                violation = "OverlapViolation"
        return PairRecord(i, j, _DECLARED[d], obs, float(self.values[k]), ok, violation)

    def failures(self):
        return [self.record(k) for k in np.flatnonzero(~self.ok)]

    def count(self, code):
        m = self.declared == code
        return int(self.ok[m].sum()), int(m.sum())

    def summary(self) -> str:
        lines = []
        for code, name in ((ORTH, "orthogonal"), (TANG, "tangent"), (DISJ, "disjoint")):
            good, total = self.count(code)
            if total:
                lines.append(f"{name} pairs: {good}/{total} ok")
        for k, v in self.clauses.items():
            lines.append(f"{k}: {'pass' if v else 'FAIL'}")
        for k, v in self.residuals.items():
            lines.append(f"{k} residual: {v:.3e}")
        for k, v in self.stats.items():
            lines.append(f"{k}: {v:.6g}")
        lines.append("verdict: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _upper_pairs(n):
    i, j = np.triu_indices(n, 1)
    return np.stack([i, j], axis=1)


def consecutive_residuals(semi: SemiNecklace) -> np.ndarray:
    c, r = semi.centers, semi.radii
    d2 = np.sum((c[1:] - c[:-1]) ** 2, axis=1)
    s = r[1:] ** 2 + r[:-1] ** 2
    return np.abs(d2 - s) / s


def hexagon_residuals(semi: SemiNecklace) -> np.ndarray:
    return np.abs(semi.radii - semi.centers[:, 2] / SQRT2) / semi.radii


def validate_semi(semi: SemiNecklace, tau_table=1e-3, tau_hex=None) -> NecklaceReport:
    if len(semi) == 0:
        raise EmptyNecklace("a semi-necklace needs at least one pearl")
    tau_hex = tau_table if tau_hex is None else tau_hex
    n = len(semi)
    pairs = _upper_pairs(n)
    consecutive = pairs[:, 1] - pairs[:, 0] == 1
    G = inner_matrix(semi.centers, semi.radii)
    values = G[pairs[:, 0], pairs[:, 1]].copy() if n > 1 else np.zeros(0)
    cons = consecutive_residuals(semi)
    values[consecutive] = cons
    declared = np.where(consecutive, ORTH, DISJ)
    ok = np.where(consecutive, values <= tau_table, values > 1.0)
    hexa = hexagon_residuals(semi)
    report = NecklaceReport(pairs, declared, values, ok, tau_table, notes=["semi"])
    report.clauses["half-space"] = bool(np.all(semi.centers[:, 2] >= 0))
    report.clauses["in page"] = bool(np.all(semi.centers[:, 3] == 0))
    report.clauses["hexagon-ready"] = bool(np.all(hexa <= tau_hex))
    report.residuals["consecutive"] = float(cons.max()) if len(cons) else 0.0
    report.residuals["hexagon"] = float(hexa.max())
    return report


def rectify_semi(semi: SemiNecklace, tol=1e-14, max_iter=30):
    """Snap radii to x3/sqrt2 and move centers minimally onto exact orthogonality.

    Printed tables carry 6 to 10 significant digits, which leaves consecutive
    products of order 1e-5.  Each pearl is moved by a Gauss-Newton
    minimum-norm step measured in units of its own radius, keeping radius
    tied to height.  Returns (rectified necklace, max displacement / radius).
    """
    c0 = np.array(semi.centers[:, :3], dtype=float)
    scale = np.array(semi.radii, dtype=float)
    n = len(c0)
    if n < 2:
        r = c0[:, 2] / SQRT2
        return semi.replace(centers=np.hstack([c0, np.zeros((n, 1))]), radii=r), \
            float(np.max(np.abs(r - scale) / scale)) if n else 0.0
    c = c0.copy()
    for _ in range(max_iter):
        r2 = c[:, 2] ** 2 / 2.0
        diff = c[:-1] - c[1:]
        norm = np.sqrt(r2[:-1] * r2[1:])
        g = (np.sum(diff ** 2, axis=1) - r2[:-1] - r2[1:]) / (2 * norm)
        if np.max(np.abs(g)) <= tol:
            break
        Jm = np.zeros((n - 1, 3 * n))
        for k in range(n - 1):
            a = 2 * diff[k]
            a0 = a.copy()
            a0[2] -= c[k, 2]
            b = -a
            b[2] -= c[k + 1, 2]
            Jm[k, 3 * k:3 * k + 3] = a0 * scale[k] / (2 * norm[k])
            Jm[k, 3 * k + 3:3 * k + 6] = b * scale[k + 1] / (2 * norm[k])
        step = -Jm.T @ np.linalg.solve(Jm @ Jm.T, g)
        c += step.reshape(n, 3) * scale[:, None]
    disp = np.max(np.linalg.norm(c - c0, axis=1) / scale)
    rad = c[:, 2] / SQRT2
    disp = max(disp, float(np.max(np.abs(rad - scale) / scale)))
    out = semi.replace(centers=np.hstack([c, np.zeros((n, 1))]), radii=rad)
    return out, float(disp)


# ---------------------------------------------------------------- spun

@dataclass(frozen=True)
class PearlLabel:
    kind: str          # "meridian", "pole" or "junction"
    level: int = 0     # k, 1-based
    meridian: int = 0  # i, 1..6

    def __str__(self):
        if self.kind == "pole":
            return f"pole{self.level}"
        tag = "S" if self.kind == "meridian" else "P"
        return f"{tag}[{self.level},{self.meridian}]"


@dataclass
class SpunNecklace:
    """A finite family of pearls with declared orthogonal and tangent pairs.

    ``adjacency`` maps sorted index pairs to PairType.ORTHOGONAL or
    PairType.TANGENT; every other pair is expected disjoint.
    """

    spheres: list
    labels: list
    adjacency: dict
    name: str = ""
    levels: int = 0
    semi: SemiNecklace | None = None
    rectification: float = 0.0
    junction_offsets: list = field(default_factory=list)
    report: NecklaceReport | None = None

    def __len__(self):
        return len(self.spheres)

    @property
    def centers(self) -> np.ndarray:
        return np.array([s.center for s in self.spheres])

    @property
    def radii(self) -> np.ndarray:
        return np.array([s.radius for s in self.spheres])

    @property
    def validated(self) -> bool:
        return self.report is not None and self.report.passed

    def index(self, label: PearlLabel) -> int:
        return self.labels.index(label)

    def orthogonal_pairs(self):
        return sorted(p for p, t in self.adjacency.items() if t == PairType.ORTHOGONAL)

    def tangent_pairs(self):
        return sorted(p for p, t in self.adjacency.items() if t == PairType.TANGENT)


def _key(i, j):
    return (i, j) if i < j else (j, i)


def ring_angle(i):
    return 2 * np.pi * i / MERIDIANS


def solve_pole_pearl(ring, pole, tol=1e-9) -> InversiveSphere:
    """Sphere centered at ``pole`` orthogonal to a hexagonal ring of six pearls."""
    p = np.asarray(pole, dtype=float).reshape(4)
    c = np.array([s.center for s in ring])
    r = np.array([s.radius for s in ring])
    D2 = np.sum((c - p) ** 2, axis=1)
    bad = [k for k in range(len(ring)) if D2[k] <= r[k] ** 2]
    if bad:
        raise ConstructionInfeasible("pole lies inside ring pearls", bad)
    rho2 = D2 - r ** 2
    if np.ptp(rho2) > 1e-9 * rho2.max():
        raise ConstructionInfeasible("ring is not symmetric about the pole",
                                     list(np.flatnonzero(np.abs(rho2 - rho2.mean()) > 1e-9 * rho2.max())))
    pole_s = sphere_from_center_radius(p, np.sqrt(rho2.mean()))
    res = [abs(pair_inner(pole_s, s)) for s in ring]
    if max(res) > tol:
        raise ConstructionInfeasible("pole pearl not orthogonal to its ring",
                                     [k for k, v in enumerate(res) if v > tol])
    m = len(ring)
    holes = [k for k in range(m) if not gram_psd([pole_s, ring[k], ring[(k + 1) % m]])]
    if holes:
        raise ConstructionInfeasible("hole between pole pearl and ring", holes)
    return pole_s


def quad_common_point(four):
    """Common point of a quad (A, B, C, D) with tangent diagonals A-D and B-C.

    Returns (point, residual) where residual is the largest relative
    distance from the point to the four spheres.
    """
    A, B, C, D = four
    pts = []
    for X, Y in ((A, D), (B, C)):
        u = Y.center - X.center
        pts.append(X.center + X.radius * u / np.linalg.norm(u))
    p = 0.5 * (pts[0] + pts[1])
    res = max(abs(np.linalg.norm(p - s.center) - s.radius) / s.radius for s in four)
    return p, float(res)


def quad_law_residual(four) -> float:
    """Largest relative gap between a diagonal distance and r + R."""
    A, B, C, D = four
    out = 0.0
    for X, Y in ((A, D), (B, C)):
        s = X.radius + Y.radius
        out = max(out, abs(np.linalg.norm(X.center - Y.center) - s) / s)
    return out


def _disjoint_from(center, radius, oc, orad, tol):
    d2 = np.sum((oc - center) ** 2, axis=1)
    ip = (d2 - radius ** 2 - orad ** 2) / (2 * radius * orad)
    bad = ip <= 1.0 + tol
    return bad


def solve_junction_pearl(four, others=(), scale=0.5, tol=1e-6, floor=1e-4):
    """Pearl orthogonal to a quad (A, B, C, D) = (S[k,i], S[k+1,i], S[k,i+1], S[k+1,i+1]).

    The four spheres meet at one point p, so every orthogonal sphere passes
    through p and its center lies in the 2-plane through p perpendicular to
    both diagonals.  The center is pushed away from the spin axis inside that
    plane; the radius starts at ``scale`` times the smallest quad radius and
    is halved until the pearl is disjoint from ``others``.
    """
    A, B, C, D = four
    if quad_law_residual(four) > 1e-6:
        raise ConstructionInfeasible("quad diagonals are not tangent", ["diagonal"])
    p, res = quad_common_point(four)
    if res > 1e-6:
        raise ConstructionInfeasible("quad has no common point", ["common point"])
    n1 = D.center - A.center
    n2 = C.center - B.center
    _, _, vt = np.linalg.svd(np.stack([n1, n2]))
    plane = vt[2:]
    out = np.array([0.0, 0.0, p[2], p[3]])
    m = plane.T @ (plane @ out)
    if np.linalg.norm(m) <= 1e-6 * np.linalg.norm(out):
        # outward direction is normal to the plane, fall back to a basis vector
        m = plane[0] if abs(plane[0, 0]) + abs(plane[0, 1]) >= abs(plane[1, 0]) + abs(plane[1, 1]) else plane[1]
    m = m / np.linalg.norm(m)
    oc = np.array([s.center for s in others]).reshape(-1, 4)
    orad = np.array([s.radius for s in others])
    rho0 = scale * min(s.radius for s in four)
    offender = None
    for direction in (m, -m):
        rho = rho0
        while rho >= floor * rho0:
            center = p + rho * direction
            bad = _disjoint_from(center, rho, oc, orad, tol) if len(orad) else np.zeros(0, bool)
            if not bad.any():
                s = sphere_from_center_radius(center, rho)
                worst = max(abs(pair_inner(s, X)) for X in four)
                if worst > 1e-10:
                    raise ConstructionInfeasible("junction pearl lost orthogonality", ["orthogonality"])
                return s
            offender = int(np.flatnonzero(bad)[0])
            rho *= 0.5
    raise OverlapViolation(f"junction pearl overlaps pearl {offender}", offender)


def spin_necklace(semi: SemiNecklace, rectify=True, poles=True, junctions=True,
                  tau_table=1e-3, junction_scale=0.5) -> SpunNecklace:
    """Spin a semi-necklace into a full necklace of S^4.

    With ``rectify`` the pearls are first moved onto exact orthogonality
    (see rectify_semi); the largest relative move is kept in
    ``rectification``.  ``poles`` may be False, True (arc endpoints on R^2)
    or a pair of points.
    """
    if len(semi) == 0:
        raise EmptyNecklace("cannot spin an empty necklace")
    pre = validate_semi(semi, tau_table)
    if not pre.passed:
        raise ConstructionInfeasible("semi-necklace fails validation",
                                     [f"{k}" for k, v in pre.clauses.items() if not v]
                                     + [f"pair {r.i},{r.j}" for r in pre.failures()])
    disp = 0.0
    if rectify:
        semi_r, disp = rectify_semi(semi)
    else:
        semi_r = semi
    l = len(semi_r)
    spheres, labels, adj = [], [], {}
    base = semi_r.spheres()
    for k in range(l):
        for i in range(1, MERIDIANS + 1):
            spheres.append(spin_sphere(base[k], ring_angle(i)))
            labels.append(PearlLabel("meridian", k + 1, i))

    def mer(k, i):
        return (k - 1) * MERIDIANS + (i - 1) % MERIDIANS

    for k in range(1, l + 1):
        for i in range(1, MERIDIANS + 1):
            adj[_key(mer(k, i), mer(k, i + 1))] = PairType.ORTHOGONAL
            if k < l:
                adj[_key(mer(k, i), mer(k + 1, i))] = PairType.ORTHOGONAL
                adj[_key(mer(k, i), mer(k + 1, i + 1))] = PairType.TANGENT
                adj[_key(mer(k, i + 1), mer(k + 1, i))] = PairType.TANGENT

    if poles is not False:
        if poles is True:
            first, last = semi_r.centers[0].copy(), semi_r.centers[-1].copy()
            first[2:] = 0.0
            last[2:] = 0.0
            if l == 1:
                off = semi_r.centers[0, 2] / SQRT2
                first[0] -= off
                last[0] += off
            ends = (first, last)
        else:
            ends = tuple(np.asarray(p, float).reshape(4) for p in poles)
        for m, (pt, k) in enumerate(zip(ends, (1, l))):
            ring = [spheres[mer(k, i)] for i in range(1, MERIDIANS + 1)]
            spheres.append(solve_pole_pearl(ring, pt))
            labels.append(PearlLabel("pole", m + 1))
            idx = len(spheres) - 1
            for i in range(1, MERIDIANS + 1):
                adj[_key(idx, mer(k, i))] = PairType.ORTHOGONAL
        if l == 1 and abs(pair_inner(spheres[-1], spheres[-2])) <= 1e-9:
            adj[_key(len(spheres) - 1, len(spheres) - 2)] = PairType.ORTHOGONAL

    offsets = []
    if junctions and l > 1:
        n_fixed = len(spheres)
        for k in range(1, l):
            for i in range(1, MERIDIANS + 1):
                ids = [mer(k, i), mer(k + 1, i), mer(k, i + 1), mer(k + 1, i + 1)]
                four = [spheres[t] for t in ids]
                near = set(ids)
                others_idx = [t for t in range(len(spheres)) if t not in near]
                try:
                    P = solve_junction_pearl(four, [spheres[t] for t in others_idx],
                                             scale=junction_scale)
                except OverlapViolation as e:
                    who = others_idx[e.offender] if e.offender is not None else None
                    raise OverlapViolation(
                        f"junction P[{k},{i}] overlaps {labels[who] if who is not None else '?'}",
                        who) from None
                p, _ = quad_common_point(four)
                offsets.append(float(np.linalg.norm(P.center - p)))
                spheres.append(P)
                labels.append(PearlLabel("junction", k, i))
                idx = len(spheres) - 1
                for t in ids:
                    adj[_key(idx, t)] = PairType.ORTHOGONAL
        assert len(spheres) == n_fixed + MERIDIANS * (l - 1)

    return SpunNecklace(spheres, labels, adj, semi.name, l, semi_r, disp, offsets)


def quads(sn: SpunNecklace):
    """Index quadruples (S[k,i], S[k+1,i], S[k,i+1], S[k+1,i+1])."""
    out = []
    for k in range(1, sn.levels):
        for i in range(1, MERIDIANS + 1):
            a = (k - 1) * MERIDIANS + (i - 1)
            c = (k - 1) * MERIDIANS + i % MERIDIANS
            out.append((a, a + MERIDIANS, c, c + MERIDIANS))
    return out


def validate_spun(sn: SpunNecklace, tol=1e-6) -> NecklaceReport:
    """Exhaustive pairwise check; the report is also stored on ``sn``."""
    n = len(sn)
    pairs = _upper_pairs(n)
    G = inner_matrix(sn.centers, sn.radii)
    signs = np.array([s.sign for s in sn.spheres], dtype=float)
    G *= signs[:, None] * signs[None, :]
    values = G[pairs[:, 0], pairs[:, 1]]
    declared = np.full(len(pairs), DISJ)
    code = {PairType.ORTHOGONAL: ORTH, PairType.TANGENT: TANG}
    if len(pairs):
        lookup = {(int(i), int(j)): k for k, (i, j) in enumerate(pairs)}
        for key, t in sn.adjacency.items():
            declared[lookup[_key(*key)]] = code[t]
    av = np.abs(values)
    ok = np.where(declared == ORTH, av <= tol,
                  np.where(declared == TANG, np.abs(av - 1.0) <= tol,
                           (values > 1.0) & (np.abs(values - 1.0) > tol)))
    report = NecklaceReport(pairs, declared, values, ok, tol)
    om = declared == ORTH
    tm = declared == TANG
    report.residuals["orthogonal"] = float(av[om].max()) if om.any() else 0.0
    report.residuals["tangent"] = float(np.abs(av[tm] - 1).max()) if tm.any() else 0.0
    qs = quads(sn) if sn.levels and sn.labels and sn.labels[0].kind == "meridian" else []
    if qs:
        law = max(quad_law_residual([sn.spheres[t] for t in q]) for q in qs)
        common = max(quad_common_point([sn.spheres[t] for t in q])[1] for q in qs)
        report.residuals["quad law"] = law
        report.residuals["common point"] = common
        report.clauses["quad law"] = law <= tol
        report.clauses["common point"] = common <= tol
    n_j = sum(1 for lab in sn.labels if lab.kind == "junction")
    if sn.levels > 1 and any(lab.kind == "junction" for lab in sn.labels):
        report.clauses["junctions complete"] = n_j == MERIDIANS * (sn.levels - 1)
    if sn.junction_offsets:
        report.stats["junction offset (max)"] = max(sn.junction_offsets)
    sn.report = report
    return report


def toy_ring() -> SpunNecklace:
    """Six unit pearls centered on the circle of radius sqrt2 in the x3x4-plane."""
    semi = SemiNecklace([[0.0, 0.0, SQRT2, 0.0]], [1.0], "toy-ring")
    sn = spin_necklace(semi, rectify=False, poles=False)
    validate_spun(sn)
    return sn


def rotate_necklace(sn: SpunNecklace, steps=1):
    """Spheres of ``sn`` rotated by steps * 60 degrees in the x3x4-plane."""
    t = ring_angle(steps)
    R = np.eye(4)
    R[2:, 2:] = [[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]]
    return [sphere_from_center_radius(R @ s.center, s.radius) for s in sn.spheres]


def spun_surface_components(semi: SemiNecklace, n_t=64, n_theta=181):
    """Number of connected pieces of each pearl's trace on the spun polygonal surface.

    The arc is the polygon from the first endpoint on R^2 through the pearl
    centers to the last endpoint.  Spinning commutes with the pearl family,
    so checking the pearls of one page covers every meridian.
    """
    from scipy import ndimage

    c = semi.centers[:, :3]
    first, last = c[0].copy(), c[-1].copy()
    first[2] = last[2] = 0.0
    poly = np.vstack([first, c, last])
    seg_a, seg_b = poly[:-1], poly[1:]
    counts = []
    for k in range(len(semi)):
        ck, rk = c[k], semi.radii[k]
        ab = seg_b - seg_a
        t = np.clip(np.einsum("ij,ij->i", ck - seg_a, ab) / np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300), 0, 1)
        near = np.linalg.norm(seg_a + t[:, None] * ab - ck, axis=1) < rk
        idx = np.flatnonzero(near)
        lo, hi = idx.min(), idx.max()
        ts = np.linspace(0.0, 1.0, n_t)
        pts = np.concatenate([seg_a[s] + ts[:, None] * ab[s] for s in range(lo, hi + 1)])
        th = np.linspace(-np.pi, np.pi, n_theta)
        # distance in R^4 from R_th(x) to the pearl center (in page th = 0)
        d2 = (np.sum((pts[:, None, :2] - ck[:2]) ** 2, axis=2)
              + pts[:, None, 2] ** 2 + ck[2] ** 2
              - 2 * pts[:, None, 2] * ck[2] * np.cos(th)[None, :])
        mask = d2 < rk * rk
        _, num = ndimage.label(mask)
        counts.append(int(num))
    return counts
