"""Torsion cosets u * G(Lambda) and the character subspaces they cut out of Z[A].

For a full-rank Gamma with A = Z^n / Gamma and a torsion coset X, the
characters of A lying in the Q-closure of X span an ideal alpha of C[A]
that is defined over Q.  Its orthogonal projector is an element N_X of
Q[A] whose coefficients are Ramanujan sums; restricting a Laurent matrix
D to alpha gives the pieces whose kernels add up to ker D_Gamma.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import Sequence

import numpy as np

from . import intmat
from .complexes import quotient_matrix
from .laurent import LaurentMatrix
from .lattices import (
    FiniteAbelianGroup,
    GroupRingElement,
    Sublattice,
    TorsionPoint,
    character_eval,
    dual_group,
    galois_closure,
    girth,
    quotient_order_B,
    ramanujan_sum,
    smith_quotient,
)


class CosetError(ValueError):
    pass


@dataclass(frozen=True)
class TorsionCoset:
    """The set u * G(lam) with lam a primitive sublattice of Z^n."""

    u: TorsionPoint
    lam: Sublattice

    def __post_init__(self):
        if self.u.n != self.lam.n:
            raise CosetError("torsion point and lattice live in different dimensions")

    @property
    def n(self) -> int:
        return self.u.n

    @property
    def r(self) -> int:
        """Number of Galois conjugates of u (meaningful once normalised)."""
        return len(galois_closure(self.u))

    def contains(self, z: TorsionPoint) -> bool:
        diff = z * self.u.inverse()
        return all(character_eval(diff, k) == 0 for k in self.lam.columns())

    def format(self) -> str:
        return f"u={self.u.format()};L={self.lam.format()}"

    @classmethod
    def parse(cls, text: str) -> TorsionCoset:
        head, sep, tail = text.partition(";L=")
        if not sep or not head.startswith("u="):
            raise CosetError(f"cannot parse coset {text!r}; expected u=q1,...,qn;L=<sublattice>")
        return cls(TorsionPoint.parse(head[2:]), Sublattice.parse(tail))


def _transport_matrix(lam: Sublattice) -> list[list[int]]:
    """Unimodular M with M(lam) = span(e_{l+1}, ..., e_n), l = n - rank(lam)."""
    n = lam.n
    s, u, _ = intmat.smith_decomposition(lam.gens)
    rank = lam.rank
    l = n - rank
    # u sends lam onto span(e_1..e_rank); rotate those to the last coordinates
    perm = [rank + i if i < l else i - l for i in range(n)]  # new row i <- old row perm[i]
    return [u[perm[i]] for i in range(n)]


def normalize_coset(x: TorsionCoset) -> TorsionCoset:
    """Canonical representative: the point of X whose torus coordinates are 1.

    With M unimodular and M(lam) the standard lattice, the automorphism
    q -> M^{-T} q carries G(lam) onto the standard torus (C*)^l x 1.  The
    first l transported coordinates are set to zero and the point is moved
    back.
    """
    lam = x.lam
    if not lam.is_primitive():
        raise CosetError(f"lattice {lam} is not primitive")
    n = lam.n
    if lam.ngens == 0 or lam.rank == 0:
        u = TorsionPoint((Fraction(0),) * n)
        return TorsionCoset(u, lam)
    m = _transport_matrix(lam)
    m_inv = intmat.inverse_unimodular(m)
    l = n - lam.rank
    q = x.u.q
    # transported = M^{-T} q
    moved = [sum((m_inv[j][i] * q[j] for j in range(n)), Fraction(0)) for i in range(n)]
    moved = [Fraction(0)] * l + moved[l:]
    back = tuple(sum((m[j][i] * moved[j] for j in range(n)), Fraction(0)) for i in range(n))
    out = TorsionCoset(TorsionPoint(back), lam)
    if not x.contains(out.u):
        raise ArithmeticError("normalisation left the coset")  # pragma: no cover
    return out


@dataclass(frozen=True)
class AlphaSubspace:
    gamma: Sublattice
    coset: TorsionCoset  # normalised
    members: tuple[TorsionPoint, ...]
    member_index: tuple[int, ...]  # positions in dual_group(gamma)

    @property
    def dimension(self) -> int:
        return len(self.members)

    @property
    def is_empty(self) -> bool:
        return not self.members


def alpha_members(gamma: Sublattice, x: TorsionCoset) -> AlphaSubspace:
    """Characters of Z^n / gamma in the Q-closure of x (x normalised first)."""
    x = normalize_coset(x)
    conj = galois_closure(x.u)
    gens = x.lam.columns()
    members, idx = [], []
    for i, z in enumerate(dual_group(gamma)):
        for uj in conj:
            if all(character_eval(z * uj.inverse(), k) == 0 for k in gens):
                members.append(z)
                idx.append(i)
                break
    return AlphaSubspace(gamma, x, tuple(members), tuple(idx))


def subgroup_B(gamma: Sublattice, lam: Sublattice) -> dict[tuple[int, ...], tuple[int, ...]]:
    """B = (Gamma + Lambda) / Gamma inside A, each element with a lift in Lambda."""
    grp = smith_quotient(gamma)
    gens = [(grp.coords(k), tuple(k)) for k in lam.columns()]
    found = {grp.identity(): (0,) * gamma.n}
    frontier = [grp.identity()]
    while frontier:
        nxt = []
        for a in frontier:
            lift = found[a]
            for g, k in gens:
                b = grp.add(a, g)
                if b not in found:
                    found[b] = tuple(x + y for x, y in zip(lift, k))
                    nxt.append(b)
        frontier = nxt
    return dict(sorted(found.items()))


def projector(gamma: Sublattice, x: TorsionCoset) -> GroupRingElement:
    """N_X = (1/|B|) sum_j sum_{b in B} u_j(b^{-1}) b with exact rational coefficients."""
    alpha = alpha_members(gamma, x)
    if alpha.is_empty:
        raise CosetError(f"G({gamma}) does not meet the coset {x.format()}")
    x = alpha.coset
    grp = smith_quotient(gamma)
    order = x.u.order
    elems = subgroup_B(gamma, x.lam)
    size = len(elems)
    coeffs = {}
    for b, lift in elems.items():
        phase = character_eval(x.u, lift)  # u(b); the orbit sum is real and even
        coeffs[b] = Fraction(ramanujan_sum(order, int(phase * order)), size)
    return GroupRingElement(grp, coeffs)


def projector_matrix(p: GroupRingElement) -> np.ndarray:
    """Integer matrix of x -> x * (|B| N) on Z[A], with the common denominator."""
    den = 1
    for c in p.coeffs.values():
        den = den * c.denominator // np.gcd(den, c.denominator)
    grp = p.group
    size = grp.order
    out = intmat.zeros(size, size)
    elems = grp.elements()
    for c, val in p.coeffs.items():
        k = int(val * den)
        for i, a in enumerate(elems):
            out[i, grp.index_of(grp.add(a, c))] += k
    return out, den


def _complement_matrix(p: GroupRingElement) -> np.ndarray:
    """Integer matrix of den * (1 - N) so that alpha = {x : x M = 0}."""
    m, den = projector_matrix(p)
    return intmat.identity(m.shape[0]) * den - m


@dataclass(frozen=True)
class DimensionCheck:
    ok: bool
    members: int
    r: int
    order_A: int
    order_B: int

    @property
    def expected(self) -> int:
        return self.r * self.order_A // self.order_B


def alpha_dimension_check(gamma: Sublattice, x: TorsionCoset) -> DimensionCheck:
    alpha = alpha_members(gamma, x)
    if alpha.is_empty:
        raise CosetError(f"G({gamma}) does not meet the coset {x.format()}")
    a = smith_quotient(gamma).order
    b = quotient_order_B(gamma, alpha.coset.lam)
    r = alpha.coset.r
    return DimensionCheck(alpha.dimension * b == r * a, alpha.dimension, r, a, b)


@dataclass(frozen=True)
class VolumeCheck:
    volume_sq: int
    bound_sq: int

    @property
    def ok(self) -> bool:
        return self.volume_sq <= self.bound_sq


def alpha_volume_sq(gamma: Sublattice, x: TorsionCoset) -> VolumeCheck:
    """vol^2 of the Z-support of alpha, with the bound (r|B|)^{2 r |A| / |B|}."""
    alpha = alpha_members(gamma, x)
    if alpha.is_empty:
        return VolumeCheck(1, 1)
    p = projector(gamma, x)
    vol2 = intmat.left_kernel_volume_sq(_complement_matrix(p))
    a = smith_quotient(gamma).order
    b = quotient_order_B(gamma, alpha.coset.lam)
    r = alpha.coset.r
    return VolumeCheck(vol2, (r * b) ** (2 * r * a // b))


def _restricted_system(d: LaurentMatrix, gamma: Sublattice, x: TorsionCoset) -> np.ndarray | None:
    """Integer matrix whose left kernel is ker(D_Gamma) intersected with alpha^k."""
    grp = smith_quotient(gamma)
    if alpha_members(gamma, x).is_empty:
        return None
    dg = quotient_matrix(d, grp)
    comp = _complement_matrix(projector(gamma, x))
    size = grp.order
    block = intmat.zeros(d.rows * size, d.rows * size)
    for i in range(d.rows):
        block[i * size:(i + 1) * size, i * size:(i + 1) * size] = comp
    return np.concatenate([dg, block], axis=1)


def restricted_kernel_volume_sq(d: LaurentMatrix, gamma: Sublattice, x: TorsionCoset) -> int:
    """vol^2 of ker(D_{Gamma,X}) = ker(D_Gamma) intersected with alpha(Gamma, X)^k."""
    system = _restricted_system(d, gamma, x)
    if system is None:
        return 1
    return intmat.left_kernel_volume_sq(system)


def restricted_kernel_basis(d: LaurentMatrix, gamma: Sublattice, x: TorsionCoset) -> np.ndarray:
    """Rational basis (integer rows) of ker(D_{Gamma,X}); empty when alpha = 0."""
    system = _restricted_system(d, gamma, x)
    if system is None:
        return intmat.zeros(0, d.rows * smith_quotient(gamma).order)
    return intmat.rational_nullspace(system.T)


@dataclass(frozen=True)
class DecompositionCheck:
    kernel_dim: int
    sum_dim: int
    kernel_volume_sq: int
    product_volume_sq: int

    @property
    def dimension_ok(self) -> bool:
        return self.kernel_dim == self.sum_dim

    @property
    def volume_ok(self) -> bool:
        return self.kernel_volume_sq <= self.product_volume_sq

    @property
    def ok(self) -> bool:
        return self.dimension_ok and self.volume_ok


def kernel_decomposition_check(d: LaurentMatrix, gamma: Sublattice,
                               cosets: Sequence[TorsionCoset]) -> DecompositionCheck:
    """Compare ker D_Gamma with the sum of the restricted kernels over the given cosets.

    A dimension mismatch means the cosets do not cover the torsion points of
    the zero set of det D; it is a modelling problem, not a numerical one.
    """
    grp = smith_quotient(gamma)
    dg = quotient_matrix(d, grp)
    kdim = dg.shape[0] - intmat.rank(dg)
    kvol = intmat.left_kernel_volume_sq(dg)
    bases = [restricted_kernel_basis(d, gamma, x) for x in cosets]
    stacked = [b for b in bases if b.shape[0]]
    sdim = intmat.rank(np.concatenate(stacked, axis=0)) if stacked else 0
    pvol = prod(restricted_kernel_volume_sq(d, gamma, x) for x in cosets)
    return DecompositionCheck(kdim, sdim, kvol, pvol)


@dataclass(frozen=True)
class GrowthRow:
    gamma: Sublattice
    girth: int
    order_B: int
    l1_length: int
    euclidean_length: float

    @property
    def ok(self) -> bool:
        # |B| >= girth / |x|_1 for the shortest generator x of Lambda
        return self.order_B * self.l1_length >= self.girth


def b_growth_probe(lam: Sublattice, family: Sequence[Sublattice]) -> list[GrowthRow]:
    gens = [k for k in lam.columns() if any(k)]
    if not gens:
        raise CosetError("Lambda must be a nontrivial lattice")
    x = min(gens, key=lambda k: (sum(abs(t) for t in k), k))
    l1 = sum(abs(t) for t in x)
    eu = float(np.sqrt(sum(t * t for t in x)))
    return [GrowthRow(g, girth(g), quotient_order_B(g, lam), l1, eu) for g in family]
