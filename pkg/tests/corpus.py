"""Deterministic test corpus: small complexes with the chain condition built in."""

import random

from abeltorsion.complexes import FreeComplex, validate_complex
from abeltorsion.laurent import LaurentMatrix, LaurentPoly
from abeltorsion.lattices import Sublattice

MAX_EXP = 2
MAX_COEF = 2


def random_poly(rng, n, terms=None):
    terms = rng.randint(1, 3) if terms is None else terms
    out = {}
    for _ in range(terms):
        e = tuple(rng.randint(-MAX_EXP, MAX_EXP) for _ in range(n))
        out[e] = rng.choice([c for c in range(-MAX_COEF, MAX_COEF + 1) if c])
    return LaurentPoly(n, out)


def monomial(n, e):
    return LaurentPoly.monomial(e)


def one_level(rng, n):
    rows, cols = rng.randint(1, 3), rng.randint(1, 3)
    grid = [[random_poly(rng, n) if rng.random() < 0.7 else LaurentPoly.zero(n) for _ in range(cols)]
            for _ in range(rows)]
    return FreeComplex(n, (cols, rows), (LaurentMatrix(n, rows, cols, grid),))


def koszul(rng, n):
    """ranks (1, 2, 1): d_1 = [f1; f2], d_2 = [f2, -f1]."""
    f1, f2 = random_poly(rng, n), random_poly(rng, n)
    d1 = LaurentMatrix.from_rows([[f1], [f2]])
    d2 = LaurentMatrix.from_rows([[f2, -f1]])
    return FreeComplex(n, (1, 2, 1), (d1, d2))


def repeated(rng, n):
    """ranks (1, 2, 1): d_1 = [f; f], d_2 = [g, -g]."""
    f, g = random_poly(rng, n), random_poly(rng, n)
    d1 = LaurentMatrix.from_rows([[f], [f]])
    d2 = LaurentMatrix.from_rows([[g, -g]])
    return FreeComplex(n, (1, 2, 1), (d1, d2))


def scaled_koszul(rng, n):
    """Koszul complex with the middle basis rescaled by monomials."""
    f1, f2 = random_poly(rng, n, 1), random_poly(rng, n, 2)
    a = tuple(rng.choice([-1, 0, 1]) for _ in range(n))
    b = tuple(rng.choice([-1, 0, 1]) for _ in range(n))
    neg = lambda e: tuple(-x for x in e)  # noqa: E731
    d1 = LaurentMatrix.from_rows([[monomial(n, a) * f1], [monomial(n, b) * f2]])
    d2 = LaurentMatrix.from_rows([[f2 * monomial(n, neg(a)), -f1 * monomial(n, neg(b))]])
    c = FreeComplex(n, (1, 2, 1), (d1, d2))
    ok = all(abs(x) <= MAX_EXP for d in c.boundaries for _, _, p in d.entries() for e in p.terms for x in e)
    return c if ok else koszul(rng, n)


def corpus(count=60, seed=20240917):
    rng = random.Random(seed)
    makers = [one_level, koszul, repeated, scaled_koszul]
    out = []
    i = 0
    while len(out) < count:
        n = 1 + i % 2
        c = makers[(i // 2) % len(makers)](rng, n)
        i += 1
        if validate_complex(c) is None:
            out.append(c)
    return out


SUBLATTICES = {
    1: [Sublattice.parse(s) for s in ("diag:5", "diag:7", "diag:12", "diag:16", "diag:30")],
    2: [Sublattice.parse(s) for s in ("diag:2,2", "mat:2,1;0,3", "diag:3,3", "mat:4,1;0,2", "diag:4,4")],
}


COSET_GAMMAS = ["diag:2,2", "diag:3,3", "diag:4,4", "diag:6,6", "mat:2,1;0,3", "mat:4,1;0,2", "diag:2,6"]
COSET_SPECS = [
    "u=0,0;L=mat:1;0",
    "u=0,0;L=mat:0;1",
    "u=0,0;L=mat:1;1",
    "u=0,1/2;L=mat:1;0",
    "u=1/3,0;L=mat:0;1",
    "u=1/2,1/2;L=mat:1;-1",
    "u=1/3,2/3;L=diag:1,1",
    "u=1/2,0;L=diag:1,1",
    "u=1/4,1/4;L=mat:1;-1",
]


def coset_pairs():
    """(Gamma, X) pairs over Z^2 whose intersection is nonempty."""
    from abeltorsion.cosets import TorsionCoset, alpha_members

    out = []
    for g in COSET_GAMMAS:
        for x in COSET_SPECS:
            gamma, cs = Sublattice.parse(g), TorsionCoset.parse(x)
            if not alpha_members(gamma, cs).is_empty:
                out.append((gamma, cs))
    return out
