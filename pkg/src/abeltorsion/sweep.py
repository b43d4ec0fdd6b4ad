"""Sublattice families, flattened report rows and the convergence verdict."""

from __future__ import annotations

import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Sequence

from .complexes import FreeComplex
from .cosets import (
    CosetError,
    TorsionCoset,
    alpha_dimension_check,
    alpha_members,
    alpha_volume_sq,
    kernel_decomposition_check,
    restricted_kernel_volume_sq,
)
from .lattices import Sublattice, girth, quotient_order_B, smith_quotient
from .spectral import DEFAULT_EPS, TorsionReport, bv_identity_check

ZERO_FLOOR = 1e-9  # a monitored column that is this small at large girth counts as converged


class FamilyError(ValueError):
    pass


def fmt_float(x: float) -> str:
    return format(x, ".12g")


def fmt_rational(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------- families

def diagonal_family(n: int, start: int, stop: int, step: int = 1) -> list[Sublattice]:
    if start < 1 or stop < start or step < 1:
        raise FamilyError(f"bad range {start}..{stop} step {step}")
    return [Sublattice.scaled(N, n) for N in range(start, stop + 1, step)]


def random_family(n: int, g: int, cap: int, seed: int, count: int = 8,
                  max_attempts: int = 20000) -> list[Sublattice]:
    """Hermite-form lattices with index <= cap and girth >= g, sampled under ``seed``.

    Diagonal entries are drawn independently and rejected when their product
    exceeds ``cap``; entries above the diagonal are reduced modulo the pivot
    of their row.  Duplicates are skipped, so consecutive members need not be
    nested.
    """
    if g < 1 or cap < 1 or count < 1:
        raise FamilyError("random family needs g >= 1, cap >= 1 and count >= 1")
    rng = random.Random(seed)
    seen: set[Sublattice] = set()
    out: list[Sublattice] = []
    for _ in range(max_attempts):
        diag = [rng.randint(1, cap) for _ in range(n)]
        if math.prod(diag) > cap:
            continue
        rows = [[0] * n for _ in range(n)]
        for i in range(n):
            rows[i][i] = diag[i]
            for j in range(i + 1, n):
                rows[i][j] = rng.randrange(diag[i])
        lat = Sublattice(tuple(tuple(r) for r in rows))
        if lat in seen or girth(lat) < g:
            continue
        seen.add(lat)
        out.append(lat)
        if len(out) == count:
            return out
    raise FamilyError(f"only {len(out)} of {count} lattices with girth >= {g} and index <= {cap} "
                      f"after {max_attempts} attempts")


def parse_family(text: str, n: int, seed: int | None = None) -> list[Sublattice]:
    """diag:A..B[:STEP] | list:SPEC|SPEC... | random:G,CAP[,COUNT]."""
    kind, _, body = text.strip().partition(":")
    try:
        if kind == "diag":
            rng, _, step = body.partition(":")
            a, _, b = rng.partition("..")
            fam = diagonal_family(n, int(a), int(b or a), int(step or 1))
        elif kind == "list":
            fam = [Sublattice.parse(s) for s in body.split("|") if s.strip()]
        elif kind == "random":
            parts = [int(x) for x in body.split(",")]
            if len(parts) not in (2, 3):
                raise FamilyError("random family needs G,CAP[,COUNT]")
            fam = random_family(n, parts[0], parts[1], 0 if seed is None else seed, *parts[2:])
        else:
            raise FamilyError(f"unknown family kind {kind!r}")
    except ValueError as exc:
        if isinstance(exc, FamilyError):
            raise
        raise FamilyError(f"cannot parse family {text!r}: {exc}") from exc
    if not fam:
        raise FamilyError("empty family")
    for lat in fam:
        if lat.n != n:
            raise FamilyError(f"{lat} is a sublattice of Z^{lat.n}, the complex lives over Z^{n}")
        if not lat.is_full_rank:
            raise FamilyError(f"{lat} does not have full rank")
    return fam


# ---------------------------------------------------------------- rows

@dataclass(frozen=True)
class SweepConfig:
    complex_path: str
    family: str
    levels: tuple[int, ...] | None = None
    eps: float = DEFAULT_EPS
    jobs: int = 1
    seed: int | None = None
    out: str | None = None
    monitor: str = "gap"


def level_columns(k: int) -> list[str]:
    return [f"free_rank_{k}", f"torsion_{k}", f"ln_tor_{k}", f"R2_{k}", f"ln_R_{k}",
            f"ln_detp_{k}", f"ln_R_{k}_per_index", f"rank_H_{k}_per_index", f"acyclic_{k}"]


HEAD_COLUMNS = ["gamma", "index", "girth", "ln_tau_H", "tau_H", "ln_tau_RS", "bv_residual",
                "flagged", "ln_tau_H_per_index", "ln_tau_RS_per_index", "gap_per_index"]


def columns(levels: Sequence[int]) -> list[str]:
    cols = list(HEAD_COLUMNS)
    for k in levels:
        cols += level_columns(k)
    return cols


@dataclass
class SweepRow:
    report: TorsionReport
    levels: tuple[int, ...]
    values: dict = field(init=False)

    def __post_init__(self):
        r = self.report
        idx = r.index
        v = {
            "gamma": r.gamma.format(),
            "index": r.index,
            "girth": r.girth,
            "ln_tau_H": r.ln_tau_h,
            "tau_H": fmt_rational(r.tau_h),
            "ln_tau_RS": r.ln_tau_rs,
            "bv_residual": r.bv_residual,
            "flagged": int(r.flagged),
            "ln_tau_H_per_index": r.ln_tau_h / idx,
            "ln_tau_RS_per_index": r.ln_tau_rs / idx,
            "gap_per_index": (r.ln_tau_h - r.ln_tau_rs) / idx,
        }
        for k in self.levels:
            lv = r.levels[k]
            v.update({
                f"free_rank_{k}": lv.free_rank,
                f"torsion_{k}": lv.torsion_order,
                f"ln_tor_{k}": lv.ln_torsion,
                f"R2_{k}": fmt_rational(lv.regulator_sq),
                f"ln_R_{k}": lv.ln_regulator,
                f"ln_detp_{k}": lv.log_det_prime,
                f"ln_R_{k}_per_index": lv.ln_regulator / idx,
                f"rank_H_{k}_per_index": lv.free_rank / idx,
                f"acyclic_{k}": int(lv.acyclic),
            })
        self.values = v

    def formatted(self) -> dict[str, str | int]:
        return {k: fmt_float(x) if isinstance(x, float) else x for k, x in self.values.items()}

    def residual_ok(self) -> bool:
        """gap equals the alternating sum of ln R_k up to bv_residual (all levels)."""
        r = self.report
        lhs = (r.ln_tau_h - r.ln_tau_rs) / r.index
        rhs = -r.regulator_alternating_log / r.index
        return abs(lhs - rhs) <= r.bv_residual / r.index * (1 + 1e-9) + 1e-15


def _one(args) -> TorsionReport:
    c, gamma, eps = args
    return bv_identity_check(c, gamma, eps)


def compute_reports(c: FreeComplex, family: Sequence[Sublattice], eps: float = DEFAULT_EPS,
                    jobs: int = 1) -> list[TorsionReport]:
    """Reports in family order; worker count never changes the result."""
    work = [(c, g, eps) for g in family]
    if jobs <= 1 or len(work) <= 1:
        return [_one(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_one, work))


def sort_rows(rows: list[SweepRow]) -> list[SweepRow]:
    return sorted(rows, key=lambda r: (r.report.girth, r.report.index, r.report.gamma.format()))


def monitor_column(name: str) -> str:
    if name == "gap":
        return "gap_per_index"
    if name.startswith("lnR:"):
        return f"ln_R_{int(name[4:])}_per_index"
    raise ValueError(f"unknown monitor {name!r}; use gap or lnR:k")


@dataclass(frozen=True)
class Verdict:
    column: str
    early: float
    late: float

    @property
    def ok(self) -> bool:
        return self.late < self.early or self.late <= ZERO_FLOOR

    def describe(self) -> str:
        state = "ok" if self.ok else "REGRESSION"
        return (f"verdict {state}: max |{self.column}| is {fmt_float(self.late)} on the "
                f"largest-girth third vs {fmt_float(self.early)} on the smallest-girth third")


def verdict(rows: Sequence[SweepRow], column: str) -> Verdict:
    """Compare the largest-girth third of the sorted rows with the smallest-girth third."""
    if not rows:
        raise FamilyError("empty family")
    third = max(1, len(rows) // 3)
    early = max(abs(r.values[column]) for r in rows[:third])
    late = max(abs(r.values[column]) for r in rows[-third:])
    return Verdict(column, early, late)


def load_pilot() -> dict:
    return json.loads(resources.files("abeltorsion").joinpath("data/pilot.json").read_text())


# ---------------------------------------------------------------- coset diagnostics

COSET_COLUMNS = ["level", "coset", "members", "r", "order_A", "order_B", "dim_ok",
                 "alpha_vol2", "alpha_bound2", "bound_ok", "restricted_vol2"]
DECOMP_COLUMNS = ["level", "kernel_dim", "sum_dim", "kernel_vol2", "product_vol2", "dim_ok", "vol_ok"]


def coset_rows(c: FreeComplex, gamma: Sublattice, cosets: Sequence[TorsionCoset],
               levels: Sequence[int]) -> tuple[list[dict], list[dict]]:
    """Per-coset diagnostics and the decomposition check of ker D_k, for each level."""
    per_coset, decomp = [], []
    order_a = smith_quotient(gamma).order
    for k in levels:
        d = c.laplacian(k)
        for x in cosets:
            alpha = alpha_members(gamma, x)
            row = {"level": k, "coset": x.format(), "members": alpha.dimension,
                   "r": alpha.coset.r, "order_A": order_a,
                   "order_B": quotient_order_B(gamma, alpha.coset.lam)}
            if alpha.is_empty:
                row.update(dim_ok="", alpha_vol2=1, alpha_bound2=1, bound_ok=1, restricted_vol2=1)
            else:
                vol = alpha_volume_sq(gamma, x)
                row.update(dim_ok=int(alpha_dimension_check(gamma, x).ok), alpha_vol2=vol.volume_sq,
                           alpha_bound2=vol.bound_sq, bound_ok=int(vol.ok),
                           restricted_vol2=restricted_kernel_volume_sq(d, gamma, x))
            per_coset.append(row)
        chk = kernel_decomposition_check(d, gamma, cosets)
        decomp.append({"level": k, "kernel_dim": chk.kernel_dim, "sum_dim": chk.sum_dim,
                       "kernel_vol2": chk.kernel_volume_sq, "product_vol2": chk.product_volume_sq,
                       "dim_ok": int(chk.dimension_ok), "vol_ok": int(chk.volume_ok)})
    return per_coset, decomp


__all__ = [
    "CosetError", "FamilyError", "SweepConfig", "SweepRow", "Verdict", "columns",
    "compute_reports", "coset_rows", "diagonal_family", "parse_family", "random_family",
    "sort_rows", "verdict",
]
