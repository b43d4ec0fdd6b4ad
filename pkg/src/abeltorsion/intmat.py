"""Exact integer linear algebra on numpy object arrays.

Everything here works with Python integers; numpy is used only to
vectorise row and column operations.  Matrices are 2-d ``dtype=object``
arrays; :func:`as_int_matrix` converts from nested lists or int arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, prod
from typing import Sequence

import numpy as np
from sympy import factorint

_INT64_SAFE = 2**62


def as_int_matrix(m, shape: tuple[int, int] | None = None) -> np.ndarray:
    if isinstance(m, np.ndarray) and m.dtype == object and m.ndim == 2:
        return m
    arr = np.array(m, dtype=object)
    if arr.ndim != 2:
        if arr.size == 0:
            arr = arr.reshape(shape if shape is not None else (0, 0))
        else:
            raise ValueError("expected a 2-d integer matrix")
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = int(v)
    return out


def max_abs(m: np.ndarray) -> int:
    return max((abs(int(x)) for x in m.flat), default=0)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product; uses int64 BLAS-free matmul when no overflow is possible."""
    a, b = as_int_matrix(a), as_int_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
    if a.size == 0 or b.size == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=object) + 0
    bound = max_abs(a) * max_abs(b) * max(a.shape[1], 1)
    if bound < _INT64_SAFE:
        return (a.astype(np.int64) @ b.astype(np.int64)).astype(object)
    return a.dot(b)


def zeros(rows: int, cols: int) -> np.ndarray:
    out = np.empty((rows, cols), dtype=object)
    out.fill(0)
    return out


def identity(size: int) -> np.ndarray:
    out = zeros(size, size)
    for i in range(size):
        out[i, i] = 1
    return out


@dataclass(frozen=True)
class Echelon:
    """Row echelon form E = U M with U unimodular.

    ``rows`` holds the nonzero rows of E (a basis of the row lattice of M)
    and ``pivots`` their leading columns.  ``transform`` is U when it was
    requested; its last ``m - rank`` rows form a basis of the integer left
    kernel {x : x M = 0}.
    """

    rows: np.ndarray
    pivots: tuple[int, ...]
    ncols: int
    transform: np.ndarray | None = None

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _balanced(x: np.ndarray, modulus: int) -> np.ndarray:
    r = x % modulus
    half = modulus // 2
    return np.where(r > half, r - modulus, r).astype(object)


def row_echelon(m, transform: bool = False) -> Echelon:
    """Integer row echelon form by gcd row operations.

    Each column is cleared below the pivot by repeatedly reducing all rows
    modulo the entry of least absolute value (a vectorised Euclid).
    """
    a = as_int_matrix(m).copy()
    nrows, ncols = a.shape
    if transform:
        a = np.concatenate([a, identity(nrows)], axis=1)
    pivots: list[int] = []
    row = 0
    for c in range(ncols):
        if row == nrows:
            break
        while True:
            nz = np.flatnonzero(a[row:, c] != 0) + row
            if nz.size == 0:
                break
            k = int(min(nz, key=lambda i: abs(a[i, c])))
            if k != row:
                a[[row, k]] = a[[k, row]]
            others = np.flatnonzero(a[row + 1:, c] != 0) + row + 1
            if others.size == 0:
                pivots.append(c)
                row += 1
                break
            q = a[others, c] // a[row, c]
            a[others] = a[others] - np.outer(q, a[row])
    if transform:
        return Echelon(a[:row, :ncols].copy(), tuple(pivots), ncols, a[:, ncols:].copy())
    return Echelon(a[:row].copy(), tuple(pivots), ncols)


def rank(m) -> int:
    m = as_int_matrix(m)
    if m.size == 0:
        return 0
    return row_echelon(m).rank


def left_kernel(m) -> np.ndarray:
    """Basis (as rows) of the lattice {x in Z^rows : x M = 0}."""
    m = as_int_matrix(m)
    if m.shape[1] == 0:
        return identity(m.shape[0])
    e = row_echelon(m, transform=True)
    basis = e.transform[e.rank:]
    return _size_reduce(basis)


def kernel(m) -> np.ndarray:
    """Basis (as rows) of the lattice {y in Z^cols : M y = 0}."""
    return left_kernel(as_int_matrix(m).T)


def _size_reduce(basis: np.ndarray) -> np.ndarray:
    """Hermite-reduce a lattice basis; same lattice, smaller entries."""
    if basis.shape[0] <= 1:
        return _primitive_sign(basis)
    return hermite_rows(basis)


def _primitive_sign(basis: np.ndarray) -> np.ndarray:
    out = basis.copy()
    for i in range(out.shape[0]):
        nz = np.flatnonzero(out[i] != 0)
        if nz.size and out[i, nz[0]] < 0:
            out[i] = -out[i]
    return out


def saturation(m) -> np.ndarray:
    """Basis of (row space of M over Q) intersected with Z^cols.

    The integer kernel of the integer kernel: ker_Z(K) where the rows of K
    span ker_Z(M).
    """
    m = as_int_matrix(m)
    ncols = m.shape[1]
    if rank(m) == 0:
        return zeros(0, ncols)
    k = kernel(m)
    if k.shape[0] == 0:
        return identity(ncols)
    return kernel(k)


def bareiss_det(m) -> int:
    """Fraction-free Gaussian elimination determinant."""
    a = as_int_matrix(m).copy()
    size = a.shape[0]
    if a.shape != (size, size):
        raise ValueError("determinant of a non-square matrix")
    if size == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(size - 1):
        if a[k, k] == 0:
            nz = np.flatnonzero(a[k + 1:, k] != 0)
            if nz.size == 0:
                return 0
            s = int(nz[0]) + k + 1
            a[[k, s]] = a[[s, k]]
            sign = -sign
        piv = a[k, k]
        sub = a[k + 1:, k + 1:] * piv - np.outer(a[k + 1:, k], a[k, k + 1:])
        a[k + 1:, k + 1:] = np.array([x // prev for x in sub.flat], dtype=object).reshape(sub.shape)
        prev = piv
    return sign * a[size - 1, size - 1]


def gram_det(basis) -> int:
    """det(B B^T) for a basis given as rows: the squared covolume."""
    b = as_int_matrix(basis)
    if b.shape[0] == 0:
        return 1
    return bareiss_det(matmul(b, b.T))


def _chain(factors: list[int]) -> list[int]:
    """Turn a multiset of positive diagonal entries into a divisibility chain."""
    ones = [d for d in factors if d == 1]
    rest = [d for d in factors if d != 1]
    n = len(rest)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = rest[i], rest[j]
            g = gcd(a, b)
            rest[i], rest[j] = g, a // g * b
    return ones + rest


def _diagonalize_mod(a: np.ndarray, modulus: int) -> list[int]:
    """Diagonal of a Smith-equivalent form of ``a`` over Z/modulus.

    Unimodular row and column operations on balanced residues; the
    diagonal is not yet a divisibility chain.
    """
    a = _balanced(a, modulus)
    nrows, ncols = a.shape
    diag: list[int] = []
    for t in range(nrows):
        while True:
            row_nz = np.flatnonzero(a[t, t:] != 0) + t
            col_nz = np.flatnonzero(a[t + 1:, t] != 0) + t + 1
            if row_nz.size == 0 and col_nz.size == 0:
                diag.append(0)
                break
            best, where = None, None
            for j in row_nz:
                v = abs(a[t, j])
                if best is None or v < best:
                    best, where = v, ("c", int(j))
            for i in col_nz:
                v = abs(a[i, t])
                if v < best:
                    best, where = v, ("r", int(i))
            kind, idx = where
            if kind == "c" and idx != t:
                a[:, [t, idx]] = a[:, [idx, t]]
            elif kind == "r":
                a[[t, idx]] = a[[idx, t]]
            p = a[t, t]
            rows = np.flatnonzero(a[t + 1:, t] != 0) + t + 1
            if rows.size:
                q = a[rows, t] // p
                a[rows] = _balanced(a[rows] - np.outer(q, a[t]), modulus)
            cols = np.flatnonzero(a[t, t + 1:] != 0) + t + 1
            if cols.size:
                q = a[t, cols] // p
                a[:, cols] = _balanced(a[:, cols] - np.outer(a[:, t], q), modulus)
            if not np.any(a[t + 1:, t] != 0) and not np.any(a[t, t + 1:] != 0):
                diag.append(int(a[t, t]))
                break
    return diag


@dataclass(frozen=True)
class IntMatrixData:
    """Cached exact invariants of one integer matrix."""

    shape: tuple[int, int]
    rank: int
    invariants: tuple[int, ...]  # nonzero invariant factors, divisibility chain

    @property
    def torsion(self) -> tuple[int, ...]:
        return tuple(d for d in self.invariants if d > 1)


FACTOR_LIMIT_BITS = 160  # larger pivots fall back to elimination modulo their product


def smith_invariants_from_echelon(e: Echelon) -> list[int]:
    r = e.rank
    if r == 0:
        return []
    pivots = [abs(int(e.rows[i, c])) for i, c in enumerate(e.pivots)]
    big = [x for x in pivots if x > 1]
    if not big:
        return [1] * r
    if max(big).bit_length() <= FACTOR_LIMIT_BITS:
        return _smith_local(e, big)
    # the column lattice of the echelon rows has full rank r and index
    # dividing delta, so it contains delta * Z^r and Smith form mod delta
    # determines it
    delta = prod(big)
    diag = _diagonalize_mod(e.rows[:, :].copy(), delta)
    diag += [0] * (r - len(diag))
    factors = [gcd(d, delta) if d else delta for d in diag[:r]]
    return _chain(factors)


def _smith_local(e: Echelon, big: list[int]) -> list[int]:
    """Invariant factors assembled prime by prime.

    For p dividing delta = prod(pivots), rows whose pivot is a p-unit are
    invertible over Z_(p) and eliminate the remaining rows; what is left
    has at most v_p(delta) rows and its Smith form mod p^v gives the
    p-parts of the invariant factors.
    """
    r = e.rank
    expo: dict[int, int] = {}
    for x in big:
        for p, k in factorint(x).items():
            expo[p] = expo.get(p, 0) + k
    out = [1] * r
    for p, v in sorted(expo.items()):
        parts = sorted(_local_parts(e, p, v))
        for i, d in enumerate(parts):
            out[r - len(parts) + i] *= d
    return out


def _local_parts(e: Echelon, p: int, v: int) -> list[int]:
    mod = p**v
    dtype = np.int64 if mod < 2**31 else object
    a = (e.rows[: e.rank] % mod).astype(dtype)
    units = [i for i, c in enumerate(e.pivots) if a[i, c] % p]
    rest = [i for i, c in enumerate(e.pivots) if not a[i, c] % p]
    if not rest:
        return []
    res = a[rest].copy()
    for i in units:
        c = e.pivots[i]
        col = res[:, c]
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        inv = pow(int(a[i, c]), -1, mod)
        y = (col[nz] * inv) % mod
        res[nz] = (res[nz] - np.outer(y, a[i]) % mod) % mod
    keep = sorted(set(range(e.ncols)) - {e.pivots[i] for i in units})
    small = [[int(x) for x in row] for row in res[:, keep]]
    return _local_smith(small, p, mod)


def _valuation(x: int, p: int) -> int:
    k = 0
    while x % p == 0:
        x //= p
        k += 1
    return k


def _local_smith(rows: list[list[int]], p: int, mod: int) -> list[int]:
    """p-parts of the Smith diagonal of a small matrix over Z / mod, mod = p^v."""
    rows = [r[:] for r in rows]
    diag = []
    while rows:
        best = None
        for i, row in enumerate(rows):
            for j, x in enumerate(row):
                if x:
                    k = _valuation(x, p)
                    if best is None or k < best[0]:
                        best = (k, i, j)
            if best is not None and best[0] == 0:
                break
        if best is None:
            diag += [mod] * len(rows)
            break
        k, i, j = best
        piv = rows.pop(i)
        pk = p**k
        inv = pow(piv[j] // pk, -1, mod)
        for row in rows:
            if row[j]:
                f = (row[j] // pk) * inv % mod
                row[:] = [(x - f * y) % mod for x, y in zip(row, piv)]
        for row in rows:
            del row[j]
        diag.append(pk)
    return diag


def smith_invariants(m) -> list[int]:
    """Nonzero invariant factors d_1 | d_2 | ... of an integer matrix."""
    m = as_int_matrix(m)
    if m.size == 0:
        return []
    return smith_invariants_from_echelon(row_echelon(m))


def analyze(m) -> IntMatrixData:
    m = as_int_matrix(m)
    if m.size == 0:
        return IntMatrixData(m.shape, 0, ())
    e = row_echelon(m)
    return IntMatrixData(m.shape, e.rank, tuple(smith_invariants_from_echelon(e)))


def rational_nullspace(m) -> np.ndarray:
    """Integer rows spanning {y in Q^cols : M y = 0}; primitive rows, not saturated."""
    m = as_int_matrix(m)
    ncols = m.shape[1]
    if m.size == 0:
        return identity(ncols)
    e = row_echelon(m)
    return _nullspace_from_echelon(e)


def _nullspace_from_echelon(e: Echelon) -> np.ndarray:
    """Fraction-free back substitution, all free columns at once.

    Column j of ``y`` is an integer multiple of the null vector with a 1 in
    free position j; a column is rescaled only when a pivot does not
    divide the running sum, which for unit pivots never happens.
    """
    ncols = e.ncols
    piv = e.pivots
    pivset = set(piv)
    free = [c for c in range(ncols) if c not in pivset]
    if not free:
        return zeros(0, ncols)
    y = zeros(ncols, len(free))
    for j, f in enumerate(free):
        y[f, j] = 1
    rows = e.rows
    for i in range(len(piv) - 1, -1, -1):
        c = piv[i]
        nz = np.flatnonzero(rows[i, c + 1:] != 0) + c + 1
        if nz.size == 0:
            continue
        s = rows[i, nz].dot(y[nz])
        p = int(rows[i, c])
        for j in np.flatnonzero(s != 0):
            sj = int(s[j])
            m = abs(p) // gcd(sj, p)
            if m != 1:
                y[:, j] *= m
                sj *= m
            y[c, j] = -(sj // p)
    out = y.T.copy()
    for j in range(out.shape[0]):
        g = reduce(gcd, (int(x) for x in out[j] if x), 0)
        if g > 1:
            out[j] //= g
    return out


def kernel_volume_sq(m) -> int:
    """vol^2 of the primitive lattice ker_Z(M) = {y : M y = 0}.

    This also equals vol^2 of the saturation of the row space of M, since a
    primitive lattice and its orthogonal complement in Z^cols have the same
    covolume.  The cheaper of the two descriptions is used.
    """
    m = as_int_matrix(m)
    ncols = m.shape[1]
    if m.size == 0 or ncols == 0:
        return 1
    e = row_echelon(m)
    r = e.rank
    k = ncols - r
    if r == 0 or k == 0:
        return 1
    if k <= r:
        w = _nullspace_from_echelon(e)
        index = prod(smith_invariants(w))
        g = gram_det(w)
    else:
        index = prod(smith_invariants_from_echelon(e))
        g = gram_det(e.rows)
    vol2, rem = divmod(g, index * index)
    if rem:
        raise ArithmeticError("saturated lattice has non-integral squared volume")
    return vol2


def left_kernel_volume_sq(m) -> int:
    """vol^2 of {x : x M = 0}."""
    return kernel_volume_sq(as_int_matrix(m).T)


def volume_sq(basis) -> int:
    """Squared volume (Gram determinant) of the lattice spanned by independent rows."""
    b = as_int_matrix(basis)
    if b.shape[0] == 0:
        return 1
    if rank(b) != b.shape[0]:
        raise ValueError("basis vectors are linearly dependent")
    return gram_det(b)


def hermite_rows(m) -> np.ndarray:
    """Row-style Hermite normal form: reduced echelon basis of the row lattice."""
    m = as_int_matrix(m)
    e = row_echelon(m)
    rows = e.rows.copy()
    for i, c in enumerate(e.pivots):
        if rows[i, c] < 0:
            rows[i] = -rows[i]
        p = rows[i, c]
        for j in range(i):
            q = rows[j, c] // p
            if q:
                rows[j] = rows[j] - q * rows[i]
    return rows


def smith_decomposition(m: Sequence[Sequence[int]]):
    """(S, U, V) with U M V = S diagonal, U and V unimodular.

    Plain Python lists; intended for the small n x r generator matrices of
    sublattices.  Pivots are chosen by least absolute value, scanning in
    row-major order so the result is deterministic.
    """
    a = [[int(x) for x in row] for row in m]
    nr = len(a)
    nc = len(a[0]) if nr else 0
    u = [[int(i == j) for j in range(nr)] for i in range(nr)]
    v = [[int(i == j) for j in range(nc)] for i in range(nc)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row dst -= q * row src
        a[dst] = [x - q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x - q * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, q):
        for row in a:
            row[dst] -= q * row[src]
        for row in v:
            row[dst] -= q * row[src]

    t = 0
    while t < min(nr, nc):
        cand = [(abs(a[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if a[i][j]]
        if not cand:
            break
        _, i, j = min(cand)
        swap_rows(t, i)
        swap_cols(t, j)
        done = False
        while not done:
            p = a[t][t]
            for i in range(t + 1, nr):
                if a[i][t]:
                    add_row(i, t, a[i][t] // p)
            for j in range(t + 1, nc):
                if a[t][j]:
                    add_col(j, t, a[t][j] // p)
            rest = [(abs(a[i][t]), i, None) for i in range(t + 1, nr) if a[i][t]]
            rest += [(abs(a[t][j]), None, j) for j in range(t + 1, nc) if a[t][j]]
            if rest:
                _, i, j = min(rest, key=lambda x: x[0])
                if i is not None:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
                continue
            # enforce divisibility of the remaining block by the pivot
            bad = [(i, j) for i in range(t + 1, nr) for j in range(t + 1, nc) if a[i][j] % p]
            if bad:
                i, _ = bad[0]
                a[t] = [x + y for x, y in zip(a[t], a[i])]
                u[t] = [x + y for x, y in zip(u[t], u[i])]
                continue
            done = True
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return a, u, v


def inverse_unimodular(m: Sequence[Sequence[int]]) -> list[list[int]]:
    """Exact inverse of a unimodular integer matrix."""
    n = len(m)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        p = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c]:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    out = [[x for x in row[n:]] for row in aug]
    if any(x.denominator != 1 for row in out for x in row):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]
