"""Presentations of the reflection group and free-group automorphisms.

Free words are tuples of nonzero ints: letter k > 0 is the k-th generator,
-k its inverse.  On two generators 1 and 2 print as a and b, with A and B
for the inverses.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .inversive import PairType

PRESENTATION_HEADER = "# spunpearls presentation v1"
ALPHABET = "abcdefghijklmnopqrstuvwxyz"


# ---------------------------------------------------------------- presentations

@dataclass(frozen=True)
class Presentation:
    """Generators I1..In; relators are tuples of 1-based generator indices."""

    generators: tuple
    relators: tuple

    def to_text(self) -> str:
        lines = [PRESENTATION_HEADER, "generators: " + " ".join(self.generators)]
        for rel in self.relators:
            if len(rel) == 2 and rel[0] == rel[1]:
                lines.append(f"I{rel[0]}^2")
            else:
                lines.append(f"(I{rel[0]}*I{rel[1]})^2")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Presentation":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != PRESENTATION_HEADER:
            raise ValueError("not a spunpearls presentation")
        if not lines[1].startswith("generators:"):
            raise ValueError("missing generators line")
        gens = tuple(lines[1].split(":", 1)[1].split())
        rels = []
        for ln in lines[2:]:
            if ln.startswith("("):
                a, b = ln[1:ln.index(")")].split("*")
                rels.append((int(a[1:]), int(b[1:]), int(a[1:]), int(b[1:])))
            else:
                a = int(ln.split("^")[0][1:])
                rels.append((a, a))
        return cls(gens, tuple(rels))

    def commuting_pairs(self):
        return [(r[0], r[1]) for r in self.relators if len(r) == 4]


def presentation_of(sn) -> Presentation:
    """I_j^2 for every pearl and (I_i I_j)^2 for every orthogonal pair, i < j."""
    n = len(sn)
    gens = tuple(f"I{j + 1}" for j in range(n))
    rels = [(j + 1, j + 1) for j in range(n)]
    pairs = sorted((i, j) for (i, j), t in sn.adjacency.items() if t == PairType.ORTHOGONAL)
    rels += [(i + 1, j + 1, i + 1, j + 1) for i, j in pairs]
    return Presentation(gens, tuple(rels))


# ---------------------------------------------------------------- free words

def free_reduce(w) -> tuple:
    out = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse_word(w) -> tuple:
    return tuple(-x for x in reversed(w))


def mul(*ws) -> tuple:
    return free_reduce([x for w in ws for x in w])


def parse_word(s: str) -> tuple:
    """'aB' -> (1, -2).  Spaces and '1' (the empty word) are ignored."""
    out = []
    for ch in s:
        if ch in " 1*":
            continue
        k = ALPHABET.index(ch.lower()) + 1
        out.append(k if ch.islower() else -k)
    return free_reduce(out)


def format_word(w) -> str:
    if not w:
        return "1"
    return "".join(ALPHABET[x - 1] if x > 0 else ALPHABET[-x - 1].upper() for x in w)


def all_words(rank: int, length: int):
    """Reduced words of exactly this length, in a fixed order (a, A, b, B, ...)."""
    letters = [s * k for k in range(1, rank + 1) for s in (1, -1)]
    if length == 0:
        yield ()
        return
    for w in all_words(rank, length - 1):
        for x in letters:
            if not w or w[-1] != -x:
                yield w + (x,)


# ---------------------------------------------------------------- automorphisms

@dataclass(frozen=True)
class Automorphism:
    """images[k] is the image of generator k+1; ``inverse`` holds the inverse's images."""

    images: tuple
    inverse: tuple | None = None

    @property
    def rank(self):
        return len(self.images)

    def __call__(self, w) -> tuple:
        out = []
        for x in w:
            img = self.images[abs(x) - 1]
            out.extend(img if x > 0 else inverse_word(img))
        return free_reduce(out)

    def __matmul__(self, other: "Automorphism") -> "Automorphism":
        """(self @ other)(w) = self(other(w))."""
        imgs = tuple(self(img) for img in other.images)
        inv = None
        if self.inverse is not None and other.inverse is not None:
            si, oi = Automorphism(self.inverse), Automorphism(other.inverse)
            inv = tuple(oi(img) for img in si.images)
        return Automorphism(imgs, inv)

    def inverted(self) -> "Automorphism":
        if self.inverse is None:
            raise ValueError("no inverse recorded")
        return Automorphism(self.inverse, self.images)

    def power(self, k: int) -> "Automorphism":
        if k < 0:
            return self.inverted().power(-k)
        out = identity_automorphism(self.rank)
        for _ in range(k):
            out = self @ out
        return out

    def verify_inverse(self) -> bool:
        if self.inverse is None:
            return False
        inv = Automorphism(self.inverse)
        gens = [(k,) for k in range(1, self.rank + 1)]
        return all(self(inv(g)) == g and inv(self(g)) == g for g in gens)

    def __str__(self):
        return ", ".join(f"{ALPHABET[k]} -> {format_word(w)}" for k, w in enumerate(self.images))


def identity_automorphism(rank=2) -> Automorphism:
    gens = tuple((k,) for k in range(1, rank + 1))
    return Automorphism(gens, gens)


def trefoil_monodromy() -> Automorphism:
    """a -> b^-1, b -> ab, with inverse a -> ba, b -> a^-1."""
    phi = Automorphism((parse_word("B"), parse_word("ab")), (parse_word("ba"), parse_word("A")))
    assert phi.verify_inverse()
    return phi


def inner(w, rank=2) -> Automorphism:
    """Conjugation x -> w x w^-1."""
    wi = inverse_word(w)
    return Automorphism(tuple(mul(w, (k,), wi) for k in range(1, rank + 1)),
                        tuple(mul(wi, (k,), w) for k in range(1, rank + 1)))


def nielsen_moves(rank=2):
    """Elementary automorphisms with explicit inverses: inversions and transvections."""
    moves = []
    for k in range(1, rank + 1):
        imgs = [(j,) for j in range(1, rank + 1)]
        imgs[k - 1] = (-k,)
        moves.append(Automorphism(tuple(imgs), tuple(imgs)))
    for k, j in product(range(1, rank + 1), repeat=2):
        if k == j:
            continue
        for s in (1, -1):
            imgs = [(i,) for i in range(1, rank + 1)]
            inv = list(imgs)
            imgs[k - 1] = (k, s * j)
            inv[k - 1] = (k, -s * j)
            moves.append(Automorphism(tuple(imgs), tuple(inv)))
    return moves


def random_automorphism(rng, steps=4, rank=2) -> Automorphism:
    moves = nielsen_moves(rank)
    out = identity_automorphism(rank)
    for _ in range(steps):
        out = moves[int(rng.integers(len(moves)))] @ out
    return out


def power_is_inner(phi: Automorphism, k: int, search_radius: int = 8):
    """A word w with phi^k(x) = w x w^-1 for every generator, |w| <= radius, or None.

    Words are tried by length, then in the order of ``all_words``, so the
    answer is the first one found.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    target = phi.power(k).images
    gens = [(j,) for j in range(1, phi.rank + 1)]
    for length in range(search_radius + 1):
        for w in all_words(phi.rank, length):
            wi = inverse_word(w)
            if all(mul(w, g, wi) == t for g, t in zip(gens, target)):
                return w
    return None


def homology_matrix(phi: Automorphism) -> np.ndarray:
    """Action on the abelianisation: column k holds the exponent sums of phi(x_k)."""
    M = np.zeros((phi.rank, phi.rank), dtype=np.int64)
    for k, img in enumerate(phi.images):
        for x in img:
            M[abs(x) - 1, k] += 1 if x > 0 else -1
    return M


def matrix_order(M, limit=1000):
    """Smallest m >= 1 with M^m = I, or None below ``limit``."""
    M = np.asarray(M, dtype=object)
    eye = np.eye(len(M), dtype=np.int64).astype(object)
    P = M.copy()
    for m in range(1, limit + 1):
        if np.array_equal(P, eye):
            return m
        P = P.dot(M)
    return None


def conjugacy_search(phi: Automorphism, max_power=12, search_radius=8):
    """Smallest k with phi^k inner (the order in Out), with its conjugator."""
    for k in range(1, max_power + 1):
        w = power_is_inner(phi, k, search_radius)
        if w is not None:
            return k, w
    return None, None
