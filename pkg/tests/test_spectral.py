import cmath
import io
import math

import numpy as np
import pytest

from abeltorsion.complexes import FreeComplex, build_quotient, homology, one_term
from abeltorsion.laurent import LaurentMatrix, LaurentPoly
from abeltorsion.lattices import Sublattice, smith_quotient
from abeltorsion.spectral import (
    FULL_SVD_LIMIT,
    RankMismatch,
    acyclicity_check,
    block_evaluations,
    bv_identity_check,
    full_matrix_log_det,
    geometric_det,
    level_spectrum,
    operator_norm_check,
    rank_crosscheck,
    ray_singer,
    write_diagnostics,
)
from corpus import SUBLATTICES, corpus

t = LaurentPoly.var(1, 0)
t1, t2 = LaurentPoly.var(2, 0), LaurentPoly.var(2, 1)
ONE2 = LaurentPoly.constant(2, 1)
CORPUS = corpus()


def test_geometric_det_examples():
    r, ld = geometric_det(np.diag([3.0, 0.0]))
    assert r == 1 and abs(ld - math.log(3)) < 1e-14
    assert geometric_det(np.zeros((2, 3))) == (0, 0.0)
    r, ld = geometric_det([[1, 1], [0, 1]])
    assert r == 2 and abs(ld) < 1e-14
    with pytest.raises(ValueError):
        geometric_det([[1.0]], eps=0)


def test_block_examples():
    w = cmath.exp(2j * cmath.pi / 3)
    blocks = block_evaluations(LaurentMatrix.from_rows([[t - 2]]), Sublattice.scaled(3, 1))
    for b, want in zip(blocks, [1 - 2, w - 2, w * w - 2]):
        assert abs(b.matrix[0, 0] - want) < 1e-12
    blocks = block_evaluations(LaurentMatrix.from_rows([[t - 1]]), Sublattice.scaled(5, 1))
    assert blocks[0].numerical_rank == 0 and blocks[0].log_det_prime == 0
    blocks = block_evaluations(LaurentMatrix.from_rows([[ONE2 + t1 + t2]]), Sublattice.scaled(2, 2))
    assert [round(b.matrix[0, 0].real) for b in blocks] == [3, 1, 1, -1]


def test_write_diagnostics():
    buf = io.StringIO()
    write_diagnostics(block_evaluations(LaurentMatrix.from_rows([[t - 2]]), Sublattice.scaled(2, 1)), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].split("\t")[:2] == ["0", "1"] and len(lines) == 2


@pytest.mark.parametrize("N", range(2, 21))
def test_ray_singer_circulants(N):
    ln, logs = ray_singer(one_term(t - 2), Sublattice.scaled(N, 1))
    assert abs(ln + math.log(2**N - 1)) <= 1e-8 and abs(logs[0] - math.log(2**N - 1)) <= 1e-8
    ln, _ = ray_singer(one_term(t - 1), Sublattice.scaled(N, 1))
    assert abs(ln + math.log(N)) <= 1e-8


def test_ray_singer_empty_complex():
    assert ray_singer(FreeComplex(1, (1,), ()), Sublattice.scaled(3, 1)) == (0.0, [])


@pytest.mark.parametrize("N", [2, 7, 12])
def test_rank_crosscheck_examples(N):
    g = Sublattice.scaled(N, 1)
    assert rank_crosscheck(LaurentMatrix.from_rows([[t - 1]]), g) == N - 1
    assert rank_crosscheck(LaurentMatrix.from_rows([[t - 2]]), g) == N
    assert rank_crosscheck(LaurentMatrix.zeros(1, 1, 1), g) == 0


def test_rank_mismatch_is_loud():
    # with a huge tolerance every singular value is dropped
    with pytest.raises(RankMismatch) as err:
        rank_crosscheck(LaurentMatrix.from_rows([[t - 2]]), Sublattice.scaled(4, 1), eps=1.0, level=1)
    assert err.value.exact == 4 and err.value.numeric < 4
    assert "eps" in str(err.value)
    with pytest.raises(RankMismatch):
        bv_identity_check(one_term(t - 2), Sublattice.scaled(4, 1), eps=1.0)


def test_acyclicity_examples():
    assert acyclicity_check(one_term(t - 2), 1)
    assert acyclicity_check(one_term(t - 1), 1)
    assert not acyclicity_check(FreeComplex(1, (1, 1), (LaurentMatrix.zeros(1, 1, 1),)), 1)


def test_operator_norm_examples():
    ok, norm, bound = operator_norm_check(LaurentMatrix.from_rows([[t - 2]]), Sublattice.scaled(6, 1))
    assert ok and abs(norm - 3) < 1e-12 and bound == 3
    ok, norm, bound = operator_norm_check(LaurentMatrix.from_rows([[ONE2 + t1 + t2]]), Sublattice.scaled(2, 2))
    assert ok and abs(norm - 3) < 1e-12 and bound == 3
    ok, norm, bound = operator_norm_check(LaurentMatrix.from_rows([[t1], [t2]]), Sublattice.scaled(2, 2))
    assert ok and abs(norm - math.sqrt(2)) < 1e-12 and bound == 4


@pytest.mark.parametrize("N", [2, 5, 9, 20])
def test_bv_examples(N):
    r = bv_identity_check(one_term(t - 1), Sublattice.scaled(N, 1))
    assert abs(r.ln_tau_rs + math.log(N)) < 1e-8 and r.ln_tau_h == 0
    assert abs(r.levels[0].ln_regulator - r.levels[1].ln_regulator + math.log(N)) < 1e-12
    assert r.bv_residual < 1e-10 and not r.flagged
    r = bv_identity_check(one_term(t - 2), Sublattice.scaled(N, 1))
    assert abs(r.ln_tau_h + math.log(2**N - 1)) < 1e-12 and r.bv_residual < 1e-8


@pytest.mark.parametrize("i", range(0, 60, 3))
def test_block_sum_matches_full_svd(i):
    c = CORPUS[i]
    for g in SUBLATTICES[c.n][:3]:
        q = build_quotient(c, g)
        grp = smith_quotient(g)
        for k, d in enumerate(c.boundaries, start=1):
            m = q.boundary(k)
            if max(m.shape) > FULL_SVD_LIMIT:
                continue
            blocks = level_spectrum(d, grp, k, 1e-9)
            rank, ld = full_matrix_log_det(m)
            assert rank == blocks.numerical_rank == q.data(k).rank
            assert abs(ld - blocks.log_det_prime) <= 1e-8 * max(1.0, abs(ld))


@pytest.mark.parametrize("i", range(0, 60, 5))
def test_det_prime_bounded_by_norm_power(i):
    c = CORPUS[i]
    for g in SUBLATTICES[c.n][:2]:
        for d in c.boundaries:
            for b in block_evaluations(d, g):
                norm = np.linalg.norm(b.matrix, 2) if b.matrix.size else 0.0
                if norm > 1e-12:
                    assert b.log_det_prime <= b.matrix.shape[1] * math.log(norm) + 1e-9
                assert b.numerical_rank <= min(b.matrix.shape)


def _acyclic_members(limit=24):
    return [i for i, c in enumerate(CORPUS[:limit]) if all(acyclicity_check(c, k) for k in range(c.top + 1))]


def _rank_ratios(c):
    out = []
    for N in (2, 4, 8, 16):
        q = build_quotient(c, Sublattice.scaled(N, c.n))
        out.append([homology(q, k).free_rank / q.group.order for k in range(q.top + 1)])
    return out


# member 5 has d_2 = -2(t1^2 + t2^2), whose torsion zeros t1 = +-i t2 first appear at N = 4:
# the ratio goes 0, 1/2, 1/4, 1/8 and is not monotone from N = 2
LATE_ONSET = {5}


@pytest.mark.parametrize("i", [
    pytest.param(i, marks=pytest.mark.xfail(strict=True, reason="torsion zeros of order 4 appear only at N=4"))
    if i in LATE_ONSET else i
    for i in _acyclic_members()
])
def test_kazhdan_lueck_trend(i):
    """free rank / index is non-increasing along N = 2, 4, 8, 16."""
    ratios = _rank_ratios(CORPUS[i])
    for a, b in zip(ratios, ratios[1:]):
        assert all(y <= x + 1e-15 for x, y in zip(a, b))


@pytest.mark.parametrize("i", _acyclic_members())
def test_kazhdan_lueck_tail(i):
    """Once the ratio peaks it only decreases, and at N = 16 it is at most half the peak."""
    ratios = _rank_ratios(CORPUS[i])
    for k in range(len(ratios[0])):
        col = [r[k] for r in ratios]
        top = col.index(max(col))
        assert all(y <= x + 1e-15 for x, y in zip(col[top:], col[top + 1:]))
        assert col[-1] <= max(col) / 2 + 1e-15


def test_report_is_deterministic():
    c = CORPUS[5]
    g = SUBLATTICES[c.n][2]
    assert bv_identity_check(c, g) == bv_identity_check(c, g)
