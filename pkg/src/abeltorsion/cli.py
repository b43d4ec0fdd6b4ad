"""abeltorsion command line.

Subcommands:
    validate  check shapes and the chain condition of a complex file
    report    exact and spectral torsion data for one sublattice
    converge  sweep a family of sublattices and check the trend of a column
    coset     torsion-coset diagnostics of the Laplacians for one sublattice

Exit codes: 0 ok, 1 usage or parse error, 2 validation or modelling error,
3 cross-check failure, 4 convergence regression.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

from .complexes import ComplexFormatError, FreeComplex, validate_complex
from .cosets import CosetError, TorsionCoset
from .lattices import Sublattice
from .spectral import DEFAULT_EPS, RankMismatch, acyclicity_check, bv_identity_check
from .sweep import (
    COSET_COLUMNS,
    DECOMP_COLUMNS,
    FamilyError,
    SweepRow,
    columns,
    compute_reports,
    coset_rows,
    monitor_column,
    parse_family,
    sort_rows,
    verdict,
)

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_CROSSCHECK, EXIT_REGRESSION = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _load(path: str) -> FreeComplex:
    try:
        return FreeComplex.load(path)
    except (OSError, json.JSONDecodeError, ComplexFormatError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _load_valid(path: str) -> FreeComplex | int:
    c = _load(path)
    bad = validate_complex(c)
    if bad is not None:
        print(f"{path}: {bad}", file=sys.stderr)
        return EXIT_INVALID
    return c


def _gamma(text: str, n: int) -> Sublattice:
    try:
        g = Sublattice.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if g.n != n:
        raise UsageError(f"{text}: sublattice of Z^{g.n} for a complex over Z^{n}")
    if not g.is_full_rank:
        raise UsageError(f"{text}: sublattice must have full rank")
    return g


def _levels(text: str | None, top: int) -> tuple[int, ...]:
    if not text:
        return tuple(range(top + 1))
    try:
        ks = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"bad --levels {text!r}") from exc
    for k in ks:
        if not 0 <= k <= top:
            raise UsageError(f"level {k} outside 0..{top}")
    return ks


def _json_value(x):
    return float(format(x, ".12g")) if isinstance(x, float) else x


def _render(rows: Sequence[dict], cols: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        text = json.dumps([{c: _json_value(r[c]) for c in cols} for r in rows], indent=1) + "\n"
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(cols), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: (format(r[c], ".12g") if isinstance(r[c], float) else r[c]) for c in cols})
        text = buf.getvalue()
    return text


def _emit(rows: Sequence[dict], cols: Sequence[str], fmt: str, out: str | None) -> None:
    _write(_render(rows, cols, fmt), out)


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    c = _load_valid(args.complex)
    if isinstance(c, int):
        return c
    print(f"{args.complex}: ok (n={c.n}, ranks={list(c.ranks)})")
    return EXIT_OK


def cmd_report(args) -> int:
    c = _load_valid(args.complex)
    if isinstance(c, int):
        return c
    gamma = _gamma(args.gamma, c.n)
    levels = _levels(args.levels, c.top)
    for k in levels:
        if not acyclicity_check(c, k):
            _warn(f"det D_{k} vanishes identically; level {k} is not L2-acyclic")
    try:
        rep = bv_identity_check(c, gamma, args.eps)
    except RankMismatch as exc:
        print(f"cross-check failed: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK
    row = SweepRow(rep, levels)
    _emit([row.values], columns(levels), args.format, args.out)
    if rep.flagged:
        print(f"cross-check failed: bv residual {rep.bv_residual:.3g}", file=sys.stderr)
        return EXIT_CROSSCHECK
    return EXIT_OK


def cmd_converge(args) -> int:
    c = _load_valid(args.complex)
    if isinstance(c, int):
        return c
    levels = _levels(args.levels, c.top)
    try:
        family = parse_family(args.family, c.n, args.seed)
        column = monitor_column(args.monitor)
    except (FamilyError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if column not in columns(levels):
        raise UsageError(f"monitored column {column} needs its level in --levels")
    for k in levels:
        if not acyclicity_check(c, k):
            _warn(f"det D_{k} vanishes identically; level {k} is not L2-acyclic")
    try:
        reports = compute_reports(c, family, args.eps, args.jobs)
    except RankMismatch as exc:
        print(f"cross-check failed: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK
    rows = sort_rows([SweepRow(r, levels) for r in reports])
    _emit([r.values for r in rows], columns(levels), args.format, args.out)
    bad = [r for r in rows if r.report.flagged or not r.residual_ok()]
    if bad:
        print(f"cross-check failed on {len(bad)} rows, first {bad[0].report.gamma}", file=sys.stderr)
        return EXIT_CROSSCHECK
    v = verdict(rows, column)
    print(v.describe(), file=sys.stderr)
    return EXIT_OK if v.ok else EXIT_REGRESSION


def cmd_coset(args) -> int:
    c = _load_valid(args.complex)
    if isinstance(c, int):
        return c
    gamma = _gamma(args.gamma, c.n)
    levels = _levels(args.levels, c.top)
    try:
        cosets = [TorsionCoset.parse(s) for s in args.coset]
    except (CosetError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    for x in cosets:
        if x.n != c.n:
            raise UsageError(f"coset {x.format()} lives in dimension {x.n}")
        if not x.lam.is_primitive():
            raise UsageError(f"coset lattice {x.lam} is not primitive")
    per_coset, decomp = coset_rows(c, gamma, cosets, levels)
    if args.format == "json":
        _write(json.dumps({"cosets": per_coset, "decomposition": decomp}, indent=1) + "\n", args.out)
    else:
        parts = [_render(per_coset, COSET_COLUMNS, "csv")] if per_coset else []
        parts.append(_render(decomp, DECOMP_COLUMNS, "csv"))
        _write("\n".join(parts), args.out)
    broken = modelling = False
    for row in per_coset:
        if row["dim_ok"] == 0 or row["bound_ok"] == 0:
            print(f"level {row['level']} coset {row['coset']}: dimension or volume bound violated",
                  file=sys.stderr)
            broken = True
    for row in decomp:
        if not row["dim_ok"]:
            print(f"level {row['level']}: dim ker D = {row['kernel_dim']} but the cosets account for "
                  f"{row['sum_dim']}; the coset list does not cover the torsion zeros of det D",
                  file=sys.stderr)
            modelling = True
        elif not row["vol_ok"]:
            print(f"level {row['level']}: kernel volume exceeds the product bound", file=sys.stderr)
            broken = True
    if broken:
        return EXIT_CROSSCHECK
    return EXIT_INVALID if modelling else EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="abeltorsion", description="Torsion and regulators of finite quotients "
                "of free Z[Z^n]-complexes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, gamma=False):
        sp.add_argument("--complex", required=True, metavar="PATH", help="complex in JSON form")
        if gamma:
            sp.add_argument("--gamma", required=True, metavar="SPEC", help="diag:N1,... or mat:r1;r2;...")
        sp.add_argument("--levels", metavar="K1,K2", help="levels to report (default all)")
        sp.add_argument("--eps", type=float, default=DEFAULT_EPS, help="relative rank tolerance")
        sp.add_argument("--out", metavar="PATH", help="output file (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    v = sub.add_parser("validate", help="check a complex file")
    v.add_argument("--complex", required=True, metavar="PATH")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("report", help="one sublattice")
    common(r, gamma=True)
    r.set_defaults(func=cmd_report)

    cv = sub.add_parser("converge", help="sweep a sublattice family")
    common(cv)
    cv.add_argument("--family", required=True, metavar="SPEC",
                    help="diag:A..B[:STEP], list:SPEC|SPEC, or random:GIRTH,CAP[,COUNT]")
    cv.add_argument("--jobs", type=int, default=1)
    cv.add_argument("--seed", type=int, default=None)
    cv.add_argument("--monitor", default="gap", help="gap or lnR:k")
    cv.set_defaults(func=cmd_converge)

    cs = sub.add_parser("coset", help="torsion-coset diagnostics")
    common(cs, gamma=True)
    cs.add_argument("--coset", action="append", default=[], metavar="u=Q1,..;L=SPEC")
    cs.set_defaults(func=cmd_coset)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "eps", 1.0) <= 0:
        print("abeltorsion: error: --eps must be positive", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "jobs", 1) < 1:
        print("abeltorsion: error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"abeltorsion: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
