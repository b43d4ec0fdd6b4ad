import cmath

import pytest
import sympy
from hypothesis import given, strategies as st

from abeltorsion.laurent import (
    LaurentMatrix,
    LaurentPoly,
    determinant,
    evaluate,
    l1_norm,
    laplacian,
    matrix_adjoint,
    poly_arith,
    unit_circle_point,
)

t = LaurentPoly.var(1, 0)
t1, t2 = LaurentPoly.var(2, 0), LaurentPoly.var(2, 1)
ONE2 = LaurentPoly.constant(2, 1)


def polys(n=2, max_terms=4, max_exp=3, max_coef=5):
    term = st.tuples(st.tuples(*[st.integers(-max_exp, max_exp)] * n),
                     st.integers(-max_coef, max_coef))
    return st.lists(term, max_size=max_terms).map(lambda ts: LaurentPoly(n, ts))


def to_sympy(f, xs):
    return sum((c * sympy.Mul(*[x**e for x, e in zip(xs, v)]) for v, c in f.items()), sympy.Integer(0))


X1, X2 = sympy.symbols("x1 x2")


# -- worked examples

def test_arith_examples():
    assert (t1 + 1) * (t1 - 1) == t1 ** 2 - 1
    f = ONE2 + t1 + t2
    assert f + LaurentPoly.zero(2) == f
    assert poly_arith(f, ONE2, "mul") == f
    with pytest.raises(ValueError):
        poly_arith(t, t1, "add")


def test_no_zero_coefficients():
    f = (t1 + 1) - t1 - 1
    assert f.is_zero() and f.terms == {}
    assert all(c != 0 for c in ((t1 + 1) * (t1 - 1)).terms.values())


def test_adjoint_examples():
    assert (t - 2).adjoint() == LaurentPoly(1, {(-1,): 1, (0,): -2})
    assert LaurentPoly.constant(2, 7).adjoint() == 7
    assert (ONE2 + t1 + t2).adjoint() == ONE2 + LaurentPoly.monomial((-1, 0)) + LaurentPoly.monomial((0, -1))


def test_matrix_adjoint_examples():
    m = LaurentMatrix.from_rows([[t1, ONE2], [0, t2]])
    want = LaurentMatrix.from_rows([[t1.adjoint(), 0], [ONE2, t2.adjoint()]])
    assert matrix_adjoint(m) == want
    z = LaurentMatrix.zeros(2, 2, 3)
    assert matrix_adjoint(z).shape == (3, 2) and matrix_adjoint(z).is_zero()
    assert matrix_adjoint(LaurentMatrix.from_rows([[t - 2]])) == LaurentMatrix.from_rows([[(t - 2).adjoint()]])


def test_l1_examples():
    assert l1_norm(LaurentMatrix.from_rows([[ONE2 + t1 + t2]])) == 3
    assert l1_norm(LaurentMatrix.from_rows([[t - 2]])) == 3
    assert l1_norm(LaurentMatrix.zeros(1, 2, 2)) == 0


def test_evaluate_examples():
    assert evaluate(ONE2 + t1 + t2, (1, 1)) == 3
    assert evaluate(t - 2, (-1,)) == -3
    w = cmath.exp(2j * cmath.pi / 3)
    v = evaluate(t - 1, (w,))
    assert abs(v - (w - 1)) < 1e-14 and abs(abs(v) - 3 ** 0.5) < 1e-14
    with pytest.raises(ValueError):
        evaluate(t - 1, (0,))


def test_laplacian_examples():
    d1 = LaurentMatrix.from_rows([[t - 2]])
    d2 = LaurentMatrix.zeros(1, 0, 1)
    assert laplacian(d1, d2) == LaurentMatrix.from_rows([[5 - 2 * t - 2 * t.adjoint()]])
    z = LaurentMatrix.zeros(2, 2, 2)
    assert laplacian(z, z).is_zero() and laplacian(z, z).shape == (2, 2)
    d1 = LaurentMatrix.from_rows([[t1 - 1]])
    assert laplacian(d1, LaurentMatrix.zeros(2, 0, 1)) == LaurentMatrix.from_rows([[2 - t1 - t1.adjoint()]])
    with pytest.raises(ValueError):
        laplacian(d1, LaurentMatrix.zeros(2, 1, 2))


def test_determinant_examples():
    assert determinant(LaurentMatrix.from_rows([[t1, ONE2], [0, t1.adjoint()]])) == 1
    f = 5 - 2 * t - 2 * t.adjoint()
    assert determinant(LaurentMatrix.from_rows([[f]])) == f
    assert determinant(LaurentMatrix.from_rows([[t, 1], [1, t]])) == t ** 2 - 1
    with pytest.raises(ValueError):
        determinant(LaurentMatrix.zeros(1, 1, 2))


def test_json_round_trip():
    f = 3 * t1 ** 2 - t2.adjoint() + 1
    assert LaurentPoly.from_json(2, f.to_json()) == f


def test_exponent_overflow_guard():
    with pytest.raises(OverflowError):
        LaurentPoly.monomial((2**62,)) * LaurentPoly.monomial((2**62,))


# -- properties

@given(polys(), polys(), polys())
def test_ring_axioms(f, g, h):
    assert f * (g + h) == f * g + f * h
    assert (f * g) * h == f * (g * h)
    assert f * g == g * f
    assert f - f == 0


@given(polys(), polys())
def test_product_matches_sympy(f, g):
    lhs = sympy.expand(to_sympy(f * g, (X1, X2)))
    rhs = sympy.expand(to_sympy(f, (X1, X2)) * to_sympy(g, (X1, X2)))
    assert sympy.simplify(lhs - rhs) == 0


@given(polys(), polys())
def test_adjoint_involution_and_multiplicative(f, g):
    assert f.adjoint().adjoint() == f
    assert (f * g).adjoint() == f.adjoint() * g.adjoint()


@given(polys(), st.tuples(st.fractions(0, 1, max_denominator=12), st.fractions(0, 1, max_denominator=12)))
def test_evaluation_on_torus_bounded_by_l1(f, q):
    z = unit_circle_point(q)
    assert abs(f.evaluate(z)) <= f.l1_norm() + 1e-9
    # adjoint evaluates to the complex conjugate on the unit torus
    assert abs(f.adjoint().evaluate(z) - f.evaluate(z).conjugate()) < 1e-9


def matrices(rows, cols):
    return st.lists(polys(max_terms=2, max_exp=2, max_coef=2), min_size=rows * cols, max_size=rows * cols).map(
        lambda es: LaurentMatrix(2, rows, cols, [es[i * cols:(i + 1) * cols] for i in range(rows)]))


@given(matrices(2, 3), matrices(1, 2))
def test_laplacian_self_adjoint(dk, dn):
    d = laplacian(dk, dn)
    assert d.shape == (2, 2)
    assert matrix_adjoint(d) == d


@given(matrices(3, 3))
def test_determinant_matches_sympy(m):
    sym = sympy.Matrix(3, 3, lambda i, j: to_sympy(m[i, j], (X1, X2)))
    ours = to_sympy(determinant(m), (X1, X2))
    assert sympy.simplify(sympy.expand(sym.det(method="berkowitz")) - sympy.expand(ours)) == 0


@given(matrices(2, 2), matrices(2, 2))
def test_determinant_multiplicative(a, b):
    assert determinant(a @ b) == determinant(a) * determinant(b)
