"""Based free Z[Z^n]-complexes, their finite quotients and exact homology data.

Boundary ``d_k`` (k = 1..m) is a b_k x b_{k-1} Laurent matrix acting on row
vectors from the right, so the chain condition reads ``d_{k+1} @ d_k == 0``.
The quotient by a full-rank sublattice Gamma replaces Z[Z^n] by Z[A],
A = Z^n / Gamma, and every Laurent entry by an |A| x |A| integer matrix
of the regular representation.

Lattice volumes are kept squared so that they stay rational.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import prod
from pathlib import Path
from typing import Sequence

import numpy as np

from . import intmat
from .laurent import LaurentMatrix, LaurentPoly, laplacian
from .lattices import FiniteAbelianGroup, Sublattice, smith_quotient


class ComplexFormatError(ValueError):
    """The complex file could not be parsed into a well-shaped complex."""


@dataclass(frozen=True)
class FreeComplex:
    n: int
    ranks: tuple[int, ...]  # b_0, ..., b_m
    boundaries: tuple[LaurentMatrix, ...]  # d_1, ..., d_m

    def __post_init__(self):
        object.__setattr__(self, "ranks", tuple(int(b) for b in self.ranks))
        object.__setattr__(self, "boundaries", tuple(self.boundaries))

    @property
    def top(self) -> int:
        return len(self.ranks) - 1

    def boundary(self, k: int) -> LaurentMatrix:
        """d_k : C_k -> C_{k-1}; empty matrices outside 1..m."""
        if 1 <= k <= len(self.boundaries):
            return self.boundaries[k - 1]
        rows = self.ranks[k] if 0 <= k < len(self.ranks) else 0
        cols = self.ranks[k - 1] if 1 <= k <= len(self.ranks) else 0
        return LaurentMatrix.zeros(self.n, rows, cols)

    def laplacian(self, k: int) -> LaurentMatrix:
        return laplacian(self.boundary(k), self.boundary(k + 1))

    # serialisation ---------------------------------------------------------
    def to_json(self) -> dict:
        bds = []
        for d in self.boundaries:
            entries = [
                {"row": i, "col": j, "terms": p.to_json()}
                for i, j, p in d.entries()
                if not p.is_zero()
            ]
            bds.append({"rows": d.rows, "cols": d.cols, "entries": entries})
        return {"n": self.n, "ranks": list(self.ranks), "boundaries": bds}

    @classmethod
    def from_json(cls, data: dict) -> FreeComplex:
        try:
            n = int(data["n"])
            ranks = [int(b) for b in data["ranks"]]
            bds = []
            for spec in data.get("boundaries", []):
                rows, cols = int(spec["rows"]), int(spec["cols"])
                grid = [[LaurentPoly.zero(n) for _ in range(cols)] for _ in range(rows)]
                for ent in spec.get("entries", []):
                    i, j = int(ent["row"]), int(ent["col"])
                    if not (0 <= i < rows and 0 <= j < cols):
                        raise ComplexFormatError(f"entry ({i}, {j}) outside a {rows}x{cols} boundary")
                    grid[i][j] = grid[i][j] + LaurentPoly.from_json(n, ent.get("terms", []))
                bds.append(LaurentMatrix(n, rows, cols, grid))
        except (KeyError, TypeError) as exc:
            raise ComplexFormatError(f"malformed complex description: {exc!r}") from exc
        if n < 1:
            raise ComplexFormatError("n must be positive")
        if len(bds) != max(len(ranks) - 1, 0):
            raise ComplexFormatError(f"{len(ranks)} ranks need {len(ranks) - 1} boundaries, got {len(bds)}")
        return cls(n, tuple(ranks), tuple(bds))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def load(cls, path: str | Path) -> FreeComplex:
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")


def one_term(f: LaurentPoly) -> FreeComplex:
    """0 -> Z[Z^n] --f--> Z[Z^n] -> 0."""
    return FreeComplex(f.n, (1, 1), (LaurentMatrix.from_rows([[f]]),))


@dataclass(frozen=True)
class Violation:
    kind: str  # "shape", "orientation" or "chain"
    level: int
    row: int | None = None
    col: int | None = None
    message: str = ""

    def __str__(self) -> str:
        where = f" entry ({self.row}, {self.col})" if self.row is not None else ""
        return f"{self.kind} violation at level {self.level}{where}: {self.message}"


def validate_complex(c: FreeComplex) -> Violation | None:
    """None if the complex is well shaped and d_{k+1} d_k = 0, else the first problem."""
    if len(c.boundaries) != max(len(c.ranks) - 1, 0):
        return Violation("shape", 0, message="number of boundaries does not match ranks")
    for k, d in enumerate(c.boundaries, start=1):
        if d.n != c.n:
            return Violation("shape", k, message=f"entries live in dimension {d.n}, expected {c.n}")
        want = (c.ranks[k], c.ranks[k - 1])
        if d.shape != want:
            if d.shape == want[::-1]:
                return Violation(
                    "orientation", k,
                    message=f"d_{k} has shape {d.shape}; boundaries act by right "
                    f"multiplication and must be b_k x b_(k-1) = {want}",
                )
            return Violation("shape", k, message=f"d_{k} has shape {d.shape}, expected {want}")
    for k in range(1, len(c.boundaries)):
        lower, upper = c.boundaries[k - 1], c.boundaries[k]
        prod_ = upper @ lower
        for i, j, p in prod_.entries():
            if not p.is_zero():
                if lower.rows == lower.cols == upper.rows == upper.cols and (lower @ upper).is_zero():
                    return Violation(
                        "orientation", k + 1, i, j,
                        f"d_{k} d_{k + 1} = 0 but d_{k + 1} d_{k} != 0; the matrices look "
                        "transposed relative to the right-multiplication convention",
                    )
                return Violation("chain", k + 1, i, j, f"(d_{k + 1} d_{k})[{i},{j}] = {p} != 0")
    return None


# ---------------------------------------------------------------- quotients

def quotient_matrix(d: LaurentMatrix, grp: FiniteAbelianGroup) -> np.ndarray:
    """Integer matrix of d over Z[A] in the basis (generator i, group element a).

    A term c t^v of entry (i, j) contributes c at ((i, a), (j, a + v)).
    """
    size = grp.order
    out = np.zeros((d.rows * size, d.cols * size), dtype=np.int64)
    big = []
    rows_idx = np.arange(size)
    for i, j, p in d.entries():
        for v, coef in p.items():
            cols = grp.translation_table(v)
            if abs(coef) >= 2**31:
                big.append((i, j, cols, coef))
                continue
            np.add.at(out, (i * size + rows_idx, j * size + cols), coef)
    res = out.astype(object)
    for i, j, cols, coef in big:
        for a in range(size):
            res[i * size + a, j * size + cols[a]] += coef
    return res


@dataclass(frozen=True)
class HomologySummary:
    level: int
    free_rank: int
    invariant_factors: tuple[int, ...]  # the factors > 1

    @property
    def torsion_order(self) -> int:
        return prod(self.invariant_factors)


class QuotientComplex:
    """C_Gamma = Z[Z^n / Gamma] (x) C as a complex of free abelian groups."""

    def __init__(self, c: FreeComplex, gamma: Sublattice):
        self.complex = c
        self.gamma = gamma
        self.group = smith_quotient(gamma)
        size = self.group.order
        self.ranks = tuple(b * size for b in c.ranks)
        self.boundaries = tuple(quotient_matrix(d, self.group) for d in c.boundaries)
        self._data: dict[int, intmat.IntMatrixData] = {}

    @property
    def top(self) -> int:
        return len(self.ranks) - 1

    def boundary(self, k: int) -> np.ndarray:
        if 1 <= k <= len(self.boundaries):
            return self.boundaries[k - 1]
        rows = self.ranks[k] if 0 <= k < len(self.ranks) else 0
        cols = self.ranks[k - 1] if 1 <= k <= len(self.ranks) else 0
        return intmat.zeros(rows, cols)

    def data(self, k: int) -> intmat.IntMatrixData:
        if k not in self._data:
            self._data[k] = intmat.analyze(self.boundary(k))
        return self._data[k]

    def laplacian(self, k: int) -> np.ndarray:
        """D_k = d_k d_k^T + d_{k+1}^T d_{k+1}; the adjoint is the transpose here."""
        dk, dn = self.boundary(k), self.boundary(k + 1)
        size = self.ranks[k]
        out = intmat.zeros(size, size)
        if dk.size:
            out = out + intmat.matmul(dk, dk.T)
        if dn.size:
            out = out + intmat.matmul(dn.T, dn)
        return out

    def check_chain(self) -> bool:
        for k in range(1, len(self.boundaries)):
            upper, lower = self.boundaries[k], self.boundaries[k - 1]
            if upper.size and lower.size and np.any(intmat.matmul(upper, lower) != 0):
                return False
        return True


def build_quotient(c: FreeComplex, gamma: Sublattice) -> QuotientComplex:
    if gamma.n != c.n:
        raise ValueError(f"sublattice of Z^{gamma.n} for a complex over Z[Z^{c.n}]")
    return QuotientComplex(c, gamma)


def homology(q: QuotientComplex, k: int) -> HomologySummary:
    if not 0 <= k <= q.top:
        raise IndexError(f"level {k} outside 0..{q.top}")
    cycles = q.ranks[k] - q.data(k).rank
    nxt = q.data(k + 1)
    return HomologySummary(k, cycles - nxt.rank, nxt.torsion)


def homology_torsion(q: QuotientComplex) -> Fraction:
    """tau^H = (prod_k |Tor H_k|^{(-1)^k})^{-1}."""
    alt = Fraction(1)
    for k in range(q.top + 1):
        t = homology(q, k).torsion_order
        alt *= Fraction(t) if k % 2 == 0 else Fraction(1, t)
    return 1 / alt


# ---------------------------------------------------------------- lattices and volumes

def cycle_lattice(m) -> np.ndarray:
    """Basis (rows) of Z_k = {x : x M = 0} for M the matrix of d_k."""
    return intmat.left_kernel(m)


def boundary_saturation(m) -> np.ndarray:
    """Basis (rows) of the saturation of the image x -> x M inside Z^cols."""
    return intmat.saturation(m)


def volume_sq(basis) -> int:
    """Gram determinant of an independent set of integer row vectors; 1 for the empty set."""
    return intmat.volume_sq(basis)


def cycle_volume_sq(m) -> int:
    """vol^2(Z_k) without forming a basis of Z_k explicitly."""
    return intmat.left_kernel_volume_sq(m)


def saturated_boundary_volume_sq(m) -> int:
    """vol^2 of the saturated image of M (equal to vol^2 of ker M acting on columns)."""
    return intmat.kernel_volume_sq(m)


def regulator_sq(q: QuotientComplex, k: int) -> Fraction:
    """R_k^2 = vol^2(Z_k) / vol^2(saturated B_k)."""
    z = cycle_volume_sq(q.boundary(k)) if q.ranks[k] else 1
    b = saturated_boundary_volume_sq(q.boundary(k + 1)) if q.ranks[k] else 1
    return Fraction(z, b)


def hodge_system(q: QuotientComplex, k: int) -> np.ndarray:
    """[d_k | d_{k+1}^T]; its left kernel is ker D_k.

    D_k is positive semidefinite with x D_k x^T = |x d_k|^2 + |d_{k+1} x^T|^2,
    so the kernel is cut out by the boundary matrices themselves and the
    squared entries of D_k never enter the elimination.
    """
    return np.concatenate([q.boundary(k), q.boundary(k + 1).T], axis=1)


def laplacian_kernel_volume_sq(q: QuotientComplex, k: int) -> int:
    """R~_k^2 = vol^2(ker D_k)."""
    if not q.ranks[k]:
        return 1
    m = hodge_system(q, k)
    if m.shape[1] == 0:
        return 1
    return intmat.left_kernel_volume_sq(m)


def laplacian_kernel_dim(q: QuotientComplex, k: int) -> int:
    if not q.ranks[k]:
        return 0
    m = hodge_system(q, k)
    return q.ranks[k] - (intmat.rank(m) if m.shape[1] else 0)
