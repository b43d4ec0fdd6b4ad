"""Sublattices of Z^n, the finite quotients A = Z^n / Gamma and their duals.

Characters of A are realised as torsion points z = exp(2 pi i q) of the
unit torus with q a vector of rationals in [0, 1).  Roots of unity never
appear as floats on exact paths: phases are kept as fractions and sums
over Galois orbits collapse to integers through Ramanujan sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product as iproduct
from math import gcd, lcm, prod
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import intmat


# ---------------------------------------------------------------- number theory

@lru_cache(maxsize=None)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def totient(n: int) -> int:
    return prod(p ** (e - 1) * (p - 1) for p, e in factorize(n))


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def ramanujan_sum(k: int, a: int) -> int:
    """c_k(a) = sum over j in (Z/k)^* of exp(2 pi i j a / k), exactly."""
    if k < 1:
        raise ValueError("ramanujan_sum needs k >= 1")
    g = gcd(a, k)
    m = k // g
    return mobius(m) * totient(k) // totient(m)


# ---------------------------------------------------------------- cyclotomic field

@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[int, ...]:
    """Coefficients of Phi_m, lowest degree first."""
    num = [-1] + [0] * (m - 1) + [1]  # x^m - 1
    for d in range(1, m):
        if m % d == 0:
            num = _poly_divexact(num, list(cyclotomic_polynomial(d)))
    return tuple(num)


def _poly_divexact(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    dq = len(num) - len(den)
    quo = [0] * (dq + 1)
    lead = den[-1]
    for i in range(dq, -1, -1):
        c, r = divmod(num[i + len(den) - 1], lead)
        if r:
            raise ArithmeticError("inexact polynomial division")
        quo[i] = c
        for j, d in enumerate(den):
            num[i + j] -= c * d
    if any(num[: len(den) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return quo


class Cyclotomic:
    """Exact element of Q(zeta_m), stored as a reduced polynomial in zeta_m."""

    __slots__ = ("m", "coeffs")

    def __init__(self, m: int, coeffs: Sequence = ()):
        self.m = m
        phi = cyclotomic_polynomial(m)
        deg = len(phi) - 1
        c = [Fraction(x) for x in coeffs]
        # reduce modulo the monic polynomial Phi_m
        for i in range(len(c) - 1, deg - 1, -1):
            top = c[i]
            if top:
                for j in range(deg + 1):
                    c[i - deg + j] -= top * phi[j]
        c = c[:deg] + [Fraction(0)] * max(0, deg - len(c))
        self.coeffs = tuple(c)

    @classmethod
    def root(cls, m: int, phase: Fraction | int) -> Cyclotomic:
        """exp(2 pi i phase) for a rational phase with denominator dividing m."""
        k = Fraction(phase) * m
        if k.denominator != 1:
            raise ValueError(f"phase {phase} is not a multiple of 1/{m}")
        k = int(k) % m
        c = [0] * (k + 1)
        c[k] = 1
        return cls(m, c)

    @classmethod
    def rational(cls, m: int, x) -> Cyclotomic:
        return cls(m, [Fraction(x)])

    def _lift(self, other) -> Cyclotomic:
        if isinstance(other, Cyclotomic):
            if other.m != self.m:
                raise ValueError("cyclotomic numbers from different fields")
            return other
        return Cyclotomic.rational(self.m, other)

    def __add__(self, other):
        other = self._lift(other)
        return Cyclotomic(self.m, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.m, [-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __mul__(self, other):
        other = self._lift(other)
        out = [Fraction(0)] * (2 * len(self.coeffs))
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        out[i + j] += a * b
        return Cyclotomic(self.m, out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        try:
            other = self._lift(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.m, self.coeffs))

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("cyclotomic number is not rational")
        return self.coeffs[0] if self.coeffs else Fraction(0)

    def __complex__(self) -> complex:
        w = np.exp(2j * np.pi / self.m)
        return complex(sum(float(c) * w**i for i, c in enumerate(self.coeffs)))

    def __repr__(self) -> str:
        return f"Cyclotomic({self.m}, {[str(c) for c in self.coeffs]})"


# ---------------------------------------------------------------- torsion points

def _reduce_phase(x) -> Fraction:
    return Fraction(x) % 1


@dataclass(frozen=True)
class TorsionPoint:
    """z = (exp(2 pi i q_1), ..., exp(2 pi i q_n)) with reduced q_i in [0, 1)."""

    q: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(_reduce_phase(x) for x in self.q))

    @classmethod
    def of(cls, *q) -> TorsionPoint:
        return cls(tuple(Fraction(x) for x in q))

    @property
    def n(self) -> int:
        return len(self.q)

    @property
    def order(self) -> int:
        return lcm(*(x.denominator for x in self.q)) if self.q else 1

    def __mul__(self, other: TorsionPoint) -> TorsionPoint:
        return TorsionPoint(tuple(a + b for a, b in zip(self.q, other.q)))

    def inverse(self) -> TorsionPoint:
        return TorsionPoint(tuple(-a for a in self.q))

    def power(self, j: int) -> TorsionPoint:
        return TorsionPoint(tuple(j * a for a in self.q))

    def complex_point(self) -> tuple[complex, ...]:
        return tuple(complex(np.exp(2j * np.pi * float(x))) for x in self.q)

    def format(self) -> str:
        return ",".join(str(x) for x in self.q)

    @classmethod
    def parse(cls, text: str) -> TorsionPoint:
        return cls(tuple(Fraction(s.strip()) for s in text.split(",") if s.strip()))

    def __str__(self) -> str:
        return "(" + ", ".join(str(x) for x in self.q) + ")"


def character_eval(z: TorsionPoint, v: Sequence[int]) -> Fraction:
    """Phase of chi_z(t^v) = z^v, i.e. <q, v> mod 1."""
    if len(v) != z.n:
        raise ValueError("dimension mismatch")
    return sum((a * int(b) for a, b in zip(z.q, v)), Fraction(0)) % 1


def galois_closure(u: TorsionPoint) -> list[TorsionPoint]:
    k = u.order
    return sorted({u.power(j) for j in range(1, k + 1) if gcd(j, k) == 1}, key=lambda p: p.q)


# ---------------------------------------------------------------- sublattices

@dataclass(frozen=True)
class Sublattice:
    """Subgroup of Z^n generated by the columns of an n x r integer matrix."""

    gens: tuple[tuple[int, ...], ...]  # rows of the n x r generator matrix

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.gens)
        if not rows:
            raise ValueError("a sublattice needs n >= 1 rows")
        if len({len(r) for r in rows}) != 1:
            raise ValueError("ragged generator matrix")
        object.__setattr__(self, "gens", rows)

    @classmethod
    def from_columns(cls, n: int, cols: Iterable[Sequence[int]]) -> Sublattice:
        cols = [list(c) for c in cols]
        if any(len(c) != n for c in cols):
            raise ValueError("generator of the wrong length")
        return cls(tuple(tuple(c[i] for c in cols) for i in range(n)))

    @classmethod
    def diagonal(cls, *ns: int) -> Sublattice:
        k = len(ns)
        return cls(tuple(tuple(ns[i] if i == j else 0 for j in range(k)) for i in range(k)))

    @classmethod
    def scaled(cls, N: int, n: int) -> Sublattice:
        return cls.diagonal(*([N] * n))

    @property
    def n(self) -> int:
        return len(self.gens)

    @property
    def ngens(self) -> int:
        return len(self.gens[0])

    def columns(self) -> list[tuple[int, ...]]:
        return [tuple(r[j] for r in self.gens) for j in range(self.ngens)]

    @cached_property
    def rank(self) -> int:
        if self.ngens == 0:
            return 0
        return intmat.rank(self.gens)

    @property
    def is_full_rank(self) -> bool:
        return self.rank == self.n

    def contains(self, v: Sequence[int]) -> bool:
        if self.is_full_rank:
            return smith_quotient(self).is_zero(v)
        aug = [list(r) + [int(x)] for r, x in zip(self.gens, v)]
        return intmat.smith_invariants(aug) == intmat.smith_invariants(self.gens) if self.ngens else not any(v)

    def hermite_basis(self) -> list[tuple[int, ...]]:
        """Hermite-reduced basis vectors of the lattice (as tuples in Z^n)."""
        if self.ngens == 0:
            return []
        rows = intmat.hermite_rows(np.array(self.columns(), dtype=object))
        return [tuple(int(x) for x in r) for r in rows]

    def is_primitive(self) -> bool:
        if self.ngens == 0 or self.rank == 0:
            return True
        return all(d == 1 for d in intmat.smith_invariants(self.gens))

    def format(self) -> str:
        diag = all(self.gens[i][j] == 0 for i in range(self.n) for j in range(self.ngens) if i != j)
        if diag and self.ngens == self.n:
            return "diag:" + ",".join(str(self.gens[i][i]) for i in range(self.n))
        return "mat:" + ";".join(",".join(str(x) for x in r) for r in self.gens)

    @classmethod
    def parse(cls, text: str) -> Sublattice:
        text = text.strip()
        kind, _, body = text.partition(":")
        if kind == "diag":
            return cls.diagonal(*(int(x) for x in body.split(",")))
        if kind == "mat":
            return cls(tuple(tuple(int(x) for x in row.split(",")) for row in body.split(";")))
        raise ValueError(f"cannot parse sublattice {text!r}; expected diag:... or mat:...")

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """A = Z^n / Gamma in Smith coordinates.

    ``u`` is the unimodular left factor of U G V = diag(d); an integer vector
    v maps to the canonical element (U v)_i mod d_i.
    """

    invariant_factors: tuple[int, ...]
    u: tuple[tuple[int, ...], ...]
    v: tuple[tuple[int, ...], ...] = field(repr=False)

    def __post_init__(self):
        d = self.invariant_factors
        for a, b in zip(d, d[1:]):
            if b % a:
                raise ValueError(f"invariant factors {d} do not form a divisibility chain")

    @property
    def n(self) -> int:
        return len(self.invariant_factors)

    @property
    def order(self) -> int:
        return prod(self.invariant_factors)

    @property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    def coords(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(
            sum(ui * int(x) for ui, x in zip(row, v)) % d
            for row, d in zip(self.u, self.invariant_factors)
        )

    def coords_many(self, vs: np.ndarray) -> np.ndarray:
        """Canonical coordinates for each row of an integer array."""
        u = np.array(self.u, dtype=np.int64)
        d = np.array(self.invariant_factors, dtype=np.int64)
        return (np.asarray(vs, dtype=np.int64) @ u.T) % d

    def is_zero(self, v: Sequence[int]) -> bool:
        return not any(self.coords(v))

    def elements(self) -> list[tuple[int, ...]]:
        """All elements, lexicographic in Smith coordinates."""
        return list(iproduct(*(range(d) for d in self.invariant_factors)))

    def element_array(self) -> np.ndarray:
        return np.array(self.elements(), dtype=np.int64).reshape(self.order, self.n)

    def index_of(self, coords) -> int:
        idx = 0
        for x, d in zip(coords, self.invariant_factors):
            idx = idx * d + int(x) % d
        return idx

    def index_many(self, coords: np.ndarray) -> np.ndarray:
        idx = np.zeros(coords.shape[0], dtype=np.int64)
        for i, d in enumerate(self.invariant_factors):
            idx = idx * d + coords[:, i] % d
        return idx

    def add(self, a, b) -> tuple[int, ...]:
        return tuple((x + y) % d for x, y, d in zip(a, b, self.invariant_factors))

    def neg(self, a) -> tuple[int, ...]:
        return tuple((-x) % d for x, d in zip(a, self.invariant_factors))

    def identity(self) -> tuple[int, ...]:
        return (0,) * self.n

    def translation_table(self, v: Sequence[int]) -> np.ndarray:
        """perm[i] = index of (element i) + image of v."""
        shift = np.array(self.coords(v), dtype=np.int64)
        return self.index_many(self.element_array() + shift)

    def pairing(self, c: Sequence[int], x: Sequence[int]) -> Fraction:
        """<q_c, x> mod 1 for the character with Smith index c and element x."""
        return sum((Fraction(ci * xi, d) for ci, xi, d in zip(c, x, self.invariant_factors)), Fraction(0)) % 1


@lru_cache(maxsize=256)
def smith_quotient(gamma: Sublattice) -> FiniteAbelianGroup:
    if not gamma.is_full_rank:
        raise ValueError(f"sublattice {gamma} does not have full rank {gamma.n}")
    s, u, v = intmat.smith_decomposition(gamma.gens)
    d = tuple(abs(s[i][i]) for i in range(gamma.n))
    return FiniteAbelianGroup(d, tuple(tuple(r) for r in u), tuple(tuple(r) for r in v))


def dual_group(gamma: Sublattice) -> list[TorsionPoint]:
    """G(Gamma): all z with z^k = 1 on Gamma, lexicographic in Smith coordinates."""
    grp = smith_quotient(gamma)
    pts = []
    for c in grp.elements():
        w = [Fraction(ci, d) for ci, d in zip(c, grp.invariant_factors)]
        # q = U^T w
        q = tuple(sum((grp.u[i][j] * w[i] for i in range(grp.n)), Fraction(0)) for j in range(grp.n))
        pts.append(TorsionPoint(q))
    return pts


def dual_phase_numerators(grp: FiniteAbelianGroup, v: Sequence[int]) -> np.ndarray:
    """For every character c (dual order) the integer k with <q_c, v> = k / exponent mod 1."""
    e = grp.exponent
    x = np.array(grp.coords(v), dtype=object)
    scale = np.array([e // d for d in grp.invariant_factors], dtype=object)
    chars = grp.element_array().astype(object)
    return ((chars * (x * scale)).sum(axis=1) % e).astype(np.int64) if grp.n else np.zeros(1, dtype=np.int64)


def in_dual(gamma: Sublattice, z: TorsionPoint) -> bool:
    return all(character_eval(z, col) == 0 for col in gamma.columns())


def girth(gamma: Sublattice) -> int:
    """Least l1 norm of a nonzero vector of Gamma (word length for t_i^{+-1})."""
    grp = smith_quotient(gamma)
    bound = min(sum(abs(x) for x in b) for b in gamma.hermite_basis())
    for radius in range(1, bound):
        for v in _l1_sphere(gamma.n, radius):
            if grp.is_zero(v):
                return radius
    return bound


def _l1_sphere(n: int, radius: int):
    """Integer vectors of l1 norm exactly ``radius``."""
    if n == 1:
        yield (radius,)
        yield (-radius,)
        return
    for first in range(-radius, radius + 1):
        rest = radius - abs(first)
        if rest == 0:
            yield (first,) + (0,) * (n - 1)
        else:
            for tail in _l1_sphere(n - 1, rest):
                yield (first,) + tail


def sum_lattices(gamma: Sublattice, lam: Sublattice) -> Sublattice:
    if not gamma.is_full_rank:
        raise ValueError("Gamma must have full rank")
    if lam.n != gamma.n:
        raise ValueError("dimension mismatch")
    cols = gamma.columns() + (lam.columns() if lam.ngens else [])
    basis = intmat.hermite_rows(np.array(cols, dtype=object))
    return Sublattice.from_columns(gamma.n, [tuple(int(x) for x in r) for r in basis])


def quotient_order_B(gamma: Sublattice, lam: Sublattice) -> int:
    """|B| = |(Gamma + Lambda) / Gamma| = |Z^n : Gamma| / |Z^n : Gamma + Lambda|."""
    big = smith_quotient(gamma).order
    small = smith_quotient(sum_lattices(gamma, lam)).order
    return big // small


# ---------------------------------------------------------------- group ring

class GroupRingElement:
    """Element of K[A] for a finite abelian group A.

    Coefficients may be Fractions or :class:`Cyclotomic` numbers; zero
    coefficients are dropped.
    """

    __slots__ = ("group", "coeffs")

    def __init__(self, group: FiniteAbelianGroup, coeffs: Mapping[tuple[int, ...], object]):
        self.group = group
        self.coeffs = {tuple(k): v for k, v in sorted(coeffs.items()) if v != 0}

    @classmethod
    def identity(cls, group: FiniteAbelianGroup) -> GroupRingElement:
        return cls(group, {group.identity(): Fraction(1)})

    def __add__(self, other: GroupRingElement) -> GroupRingElement:
        acc = dict(self.coeffs)
        for k, v in other.coeffs.items():
            acc[k] = acc[k] + v if k in acc else v
        return GroupRingElement(self.group, acc)

    def __sub__(self, other: GroupRingElement) -> GroupRingElement:
        return self + other.scale(-1)

    def scale(self, c) -> GroupRingElement:
        return GroupRingElement(self.group, {k: c * v for k, v in self.coeffs.items()})

    def __mul__(self, other: GroupRingElement) -> GroupRingElement:
        acc: dict = {}
        g = self.group
        for a, x in self.coeffs.items():
            for b, y in other.coeffs.items():
                k = g.add(a, b)
                acc[k] = acc[k] + x * y if k in acc else x * y
        return GroupRingElement(self.group, acc)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return (self - other).coeffs == {}

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def regular_matrix(self) -> list[list]:
        """Matrix of x -> x * self on K[A] (row-vector convention, canonical basis order)."""
        g = self.group
        size = g.order
        zero = Fraction(0)
        mat = [[zero] * size for _ in range(size)]
        elems = g.elements()
        for i, a in enumerate(elems):
            for c, val in self.coeffs.items():
                mat[i][g.index_of(g.add(a, c))] += val
        return mat

    def __repr__(self) -> str:
        return f"GroupRingElement({self.coeffs!r})"


def idempotent(z: TorsionPoint, grp: FiniteAbelianGroup, gamma: Sublattice | None = None) -> GroupRingElement:
    """e_z = (1/|A|) sum_a chi_z(a^{-1}) a with exact cyclotomic coefficients.

    ``z`` is given through its rational exponents; the character value at an
    element a is exp(2 pi i <q, lift(a)>).  When ``gamma`` is supplied the
    point is checked to lie in G(gamma).
    """
    if gamma is not None and not in_dual(gamma, z):
        raise ValueError(f"{z} is not a character of Z^n / {gamma}")
    m = grp.exponent
    inv_u = intmat.inverse_unimodular(grp.u)
    coeffs = {}
    w = Fraction(1, grp.order)
    for a in grp.elements():
        lift = [sum(inv_u[i][j] * a[j] for j in range(grp.n)) for i in range(grp.n)]
        phase = -character_eval(z, lift)
        if (phase * m).denominator != 1:
            raise ValueError(f"{z} is not a character of this group")
        coeffs[a] = Cyclotomic.root(m, phase) * w
    return GroupRingElement(grp, coeffs)


def lift_element(grp: FiniteAbelianGroup, a: Sequence[int]) -> tuple[int, ...]:
    """An integer vector whose class is the element with Smith coordinates a."""
    inv_u = intmat.inverse_unimodular(grp.u)
    return tuple(sum(inv_u[i][j] * a[j] for j in range(grp.n)) for i in range(grp.n))
