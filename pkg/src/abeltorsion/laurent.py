"""Laurent polynomials and matrices over the group ring Z[Z^n].

A polynomial is a finite map from exponent vectors to nonzero integer
coefficients.  Matrices act on row vectors by right multiplication, so a
map C_k -> C_{k-1} between free modules of ranks b_k and b_{k-1} is a
b_k x b_{k-1} matrix.
"""

from __future__ import annotations

import cmath
from functools import reduce
from itertools import combinations
from typing import Iterable, Mapping, Sequence

EXP_LIMIT = 2**62


def _check_exponent(v: tuple[int, ...]) -> tuple[int, ...]:
    for e in v:
        if not -EXP_LIMIT < e < EXP_LIMIT:
            raise OverflowError(f"exponent {e} outside machine range")
    return v


class LaurentPoly:
    """Immutable element of Z[t_1^{+-1}, ..., t_n^{+-1}]."""

    __slots__ = ("n", "_terms", "_hash")

    def __init__(self, n: int, terms: Mapping[Sequence[int], int] | Iterable = ()):
        if n < 1:
            raise ValueError("dimension must be positive")
        acc: dict[tuple[int, ...], int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for exp, coef in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != n:
                raise ValueError(f"exponent {exp} does not have length {n}")
            acc[exp] = acc.get(exp, 0) + int(coef)
        self.n = n
        self._terms = {e: acc[e] for e in sorted(acc) if acc[e] != 0}
        self._hash = None

    # constructors
    @classmethod
    def zero(cls, n: int) -> LaurentPoly:
        return cls(n)

    @classmethod
    def constant(cls, n: int, c: int) -> LaurentPoly:
        return cls(n, {(0,) * n: c})

    @classmethod
    def monomial(cls, exp: Sequence[int], c: int = 1) -> LaurentPoly:
        return cls(len(exp), {tuple(exp): c})

    @classmethod
    def var(cls, n: int, i: int) -> LaurentPoly:
        """The generator t_{i+1} (zero-based ``i``)."""
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): 1})

    @property
    def terms(self) -> dict[tuple[int, ...], int]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def _coerce(self, other) -> LaurentPoly:
        if isinstance(other, LaurentPoly):
            if other.n != self.n:
                raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
            return other
        if isinstance(other, int):
            return LaurentPoly.constant(self.n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._terms)
        for e, c in other._terms.items():
            acc[e] = acc.get(e, 0) + c
        return LaurentPoly(self.n, acc)

    __radd__ = __add__

    def __neg__(self) -> LaurentPoly:
        return LaurentPoly(self.n, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc: dict[tuple[int, ...], int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = _check_exponent(tuple(a + b for a, b in zip(e1, e2)))
                acc[e] = acc.get(e, 0) + c1 * c2
        return LaurentPoly(self.n, acc)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> LaurentPoly:
        if k < 0:
            raise ValueError("negative powers are only defined for monomials")
        result = LaurentPoly.constant(self.n, 1)
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = LaurentPoly.constant(self.n, other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, tuple(self._terms.items())))
        return self._hash

    def adjoint(self) -> LaurentPoly:
        """f* = sum c_v t^{-v}; the adjoint of multiplication by f on l^2(Z^n)."""
        return LaurentPoly(self.n, {tuple(-e for e in v): c for v, c in self._terms.items()})

    def l1_norm(self) -> int:
        return sum(abs(c) for c in self._terms.values())

    def evaluate(self, z: Sequence[complex]) -> complex:
        if len(z) != self.n:
            raise ValueError(f"point has {len(z)} coordinates, expected {self.n}")
        if any(zi == 0 for zi in z):
            raise ValueError("evaluation point has a zero coordinate")
        total = 0j
        for v, c in self._terms.items():
            m = complex(c)
            for zi, e in zip(z, v):
                m *= zi**e
            total += m
        return total

    def to_json(self) -> list[dict]:
        return [{"exp": list(e), "coef": c} for e, c in self._terms.items()]

    @classmethod
    def from_json(cls, n: int, data: Iterable[Mapping]) -> LaurentPoly:
        return cls(n, [(t["exp"], t["coef"]) for t in data])

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for v, c in self._terms.items():
            mono = "*".join(
                f"t{i + 1}" if e == 1 else f"t{i + 1}^{e}" for i, e in enumerate(v) if e
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def poly_arith(f: LaurentPoly, g: LaurentPoly, op: str) -> LaurentPoly:
    if f.n != g.n:
        raise ValueError(f"dimension mismatch: {f.n} vs {g.n}")
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    raise ValueError(f"unknown operation {op!r}")


class LaurentMatrix:
    """Dense rows x cols matrix of LaurentPoly sharing one dimension n."""

    __slots__ = ("n", "rows", "cols", "_entries")

    def __init__(self, n: int, rows: int, cols: int, entries=None):
        self.n, self.rows, self.cols = n, rows, cols
        if entries is None:
            grid = [[LaurentPoly.zero(n) for _ in range(cols)] for _ in range(rows)]
        else:
            grid = [list(r) for r in entries]
            if len(grid) != rows or any(len(r) != cols for r in grid):
                raise ValueError("entries do not match the declared shape")
            for r in grid:
                for j, p in enumerate(r):
                    if isinstance(p, int):
                        r[j] = LaurentPoly.constant(n, p)
                    elif p.n != n:
                        raise ValueError("entries must share the ambient dimension")
        self._entries = tuple(tuple(r) for r in grid)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[LaurentPoly | int]], n: int | None = None):
        rows = [list(r) for r in rows]
        if n is None:
            n = next((p.n for r in rows for p in r if isinstance(p, LaurentPoly)), None)
            if n is None:
                raise ValueError("cannot infer the dimension from integer entries; pass n")
        ncols = len(rows[0]) if rows else 0
        return cls(n, len(rows), ncols, rows)

    @classmethod
    def zeros(cls, n: int, rows: int, cols: int) -> LaurentMatrix:
        return cls(n, rows, cols)

    @classmethod
    def identity(cls, n: int, size: int) -> LaurentMatrix:
        one, zero = LaurentPoly.constant(n, 1), LaurentPoly.zero(n)
        return cls(n, size, size, [[one if i == j else zero for j in range(size)] for i in range(size)])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: tuple[int, int]) -> LaurentPoly:
        i, j = ij
        return self._entries[i][j]

    def entries(self):
        for i, row in enumerate(self._entries):
            for j, p in enumerate(row):
                yield i, j, p

    def tolist(self) -> list[list[LaurentPoly]]:
        return [list(r) for r in self._entries]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentMatrix):
            return NotImplemented
        return (self.n, self.shape, self._entries) == (other.n, other.shape, other._entries)

    def __hash__(self) -> int:
        return hash((self.n, self.shape, self._entries))

    def is_zero(self) -> bool:
        return all(p.is_zero() for _, _, p in self.entries())

    def __add__(self, other: LaurentMatrix) -> LaurentMatrix:
        if self.shape != other.shape or self.n != other.n:
            raise ValueError("shape mismatch in matrix sum")
        return LaurentMatrix(
            self.n, self.rows, self.cols,
            [[self[i, j] + other[i, j] for j in range(self.cols)] for i in range(self.rows)],
        )

    def __matmul__(self, other: LaurentMatrix) -> LaurentMatrix:
        if self.cols != other.rows or self.n != other.n:
            raise ValueError(f"cannot compose {self.shape} with {other.shape}")
        zero = LaurentPoly.zero(self.n)
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = zero
                for k in range(self.cols):
                    a = self._entries[i][k]
                    if a:
                        b = other._entries[k][j]
                        if b:
                            acc = acc + a * b
                row.append(acc)
            out.append(row)
        return LaurentMatrix(self.n, self.rows, other.cols, out)

    def adjoint(self) -> LaurentMatrix:
        return LaurentMatrix(
            self.n, self.cols, self.rows,
            [[self[j, i].adjoint() for j in range(self.rows)] for i in range(self.cols)],
        )

    def l1_norm(self) -> int:
        return sum(p.l1_norm() for _, _, p in self.entries())

    def evaluate(self, z: Sequence[complex]) -> list[list[complex]]:
        return [[p.evaluate(z) for p in row] for row in self._entries]

    def __repr__(self) -> str:
        return f"LaurentMatrix({[list(r) for r in self._entries]!r})"


def matrix_adjoint(m: LaurentMatrix) -> LaurentMatrix:
    return m.adjoint()


def l1_norm(m: LaurentMatrix) -> int:
    return m.l1_norm()


def evaluate(f: LaurentPoly, z: Sequence[complex]) -> complex:
    return f.evaluate(z)


def laplacian(d_k: LaurentMatrix, d_succ: LaurentMatrix) -> LaurentMatrix:
    """D = d_k^* d_k + d_{k+1} d_{k+1}^* as an operator on C_k.

    With maps acting on row vectors from the right, composing ``f`` then
    ``g`` is the matrix product ``f @ g``; hence the matrix of D is
    ``d_k @ d_k.adjoint() + d_succ.adjoint() @ d_succ``.
    """
    if d_k.n != d_succ.n:
        raise ValueError("dimension mismatch")
    if d_succ.cols != d_k.rows:
        raise ValueError(
            f"d_(k+1) of shape {d_succ.shape} does not map into the domain of d_k {d_k.shape}"
        )
    return d_k @ d_k.adjoint() + d_succ.adjoint() @ d_succ


def determinant(m: LaurentMatrix) -> LaurentPoly:
    """Exact determinant over the commutative ring Z[Z^n].

    Division-free Laplace expansion along rows with memoisation over
    column subsets, O(k 2^k) ring operations for a k x k matrix.
    """
    if m.rows != m.cols:
        raise ValueError(f"determinant of non-square matrix {m.shape}")
    size = m.rows
    one = LaurentPoly.constant(m.n, 1)
    if size == 0:
        return one
    # minors[S] = det of rows (size-|S|..size-1) restricted to columns S
    minors: dict[tuple[int, ...], LaurentPoly] = {(): one}
    for depth in range(1, size + 1):
        row = size - depth
        nxt: dict[tuple[int, ...], LaurentPoly] = {}
        for cols in combinations(range(size), depth):
            acc = LaurentPoly.zero(m.n)
            for pos, c in enumerate(cols):
                a = m[row, c]
                if not a:
                    continue
                rest = minors[cols[:pos] + cols[pos + 1:]]
                if not rest:
                    continue
                term = a * rest
                acc = acc - term if pos % 2 else acc + term
            nxt[cols] = acc
        minors = nxt
    return minors[tuple(range(size))]


def product(polys: Iterable[LaurentPoly], n: int) -> LaurentPoly:
    return reduce(lambda a, b: a * b, polys, LaurentPoly.constant(n, 1))


def unit_circle_point(q: Sequence) -> tuple[complex, ...]:
    """exp(2 pi i q) coordinatewise, for rational or float q."""
    return tuple(cmath.exp(2j * cmath.pi * float(x)) for x in q)
