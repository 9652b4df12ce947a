from fractions import Fraction
from math import comb, factorial

import pytest
from hypothesis import given, strategies as st

from optransport.algebra import (
    COMMUTATOR,
    FFTC,
    XY,
    AlgebraMismatch,
    FinAlgebra,
    LinearOperator,
    OmegaConstraint,
    alg_mul,
    divided_power_product,
    is_diff_operator,
    is_rb_operator,
    make_divided_power,
    make_truncated_polynomial,
    omega_holds,
    op_polynomial,
    polynomial_derivation,
    scalar,
)

from .strategies import elements, small, weights


def binomial_poly(x, k):
    return comb(x, k) if x >= 0 else 0


def product_oracle(m, n, lam):
    """Coefficients of z_m z_n read off a concrete Rota-Baxter model.

    At weight λ ≠ 0 the sum operator f ↦ λ Σ_{i<x} f(i) on functions of x
    sends z_k to λ^k C(x, k); the binomial polynomials are independent, so
    the coefficients are recovered by solving a triangular system on x = 0..m+n.
    At λ = 0, z_k is x^k / k! and the product is a single binomial.
    """
    if lam == 0:
        return {m + n: Fraction(factorial(m + n), factorial(m) * factorial(n))}
    top = m + n
    target = [Fraction(lam) ** (m + n) * comb(x, m) * comb(x, n) for x in range(top + 1)]
    coeffs = {}
    for k in range(top + 1):
        # value at x = k involves C(k, j) for j ≤ k only
        rest = target[k] - sum(c * Fraction(lam) ** j * comb(k, j) for j, c in coeffs.items())
        coeffs[k] = rest / Fraction(lam) ** k
    return {k: c for k, c in coeffs.items() if c}


@pytest.mark.parametrize("lam", [0, 1, -1, 2])
def test_divided_power_product_matches_model(lam):
    for m in range(6):
        for n in range(6 - m):
            assert divided_power_product(m, n, lam) == product_oracle(m, n, lam)


def test_unit_is_neutral():
    alg, _, _ = make_divided_power(4, 1)
    x = alg.element([1, 2, 3, 4])
    assert alg_mul(alg.one, x) == x


@pytest.mark.parametrize("lam", [0, 1, -1, 2])
def test_z1_squared(lam):
    alg, _, _ = make_divided_power(3, lam)
    z1, z2 = alg.basis(1), alg.basis(2)
    assert z1 * z1 == 2 * z2 + lam * z1


def test_product_truncates_in_quotient():
    alg, _, _ = make_divided_power(3, 0)
    assert (alg.basis(1) * alg.basis(2)).is_zero()


def test_mismatched_algebras_rejected():
    a, _, _ = make_divided_power(2, 0)
    b, _, _ = make_divided_power(2, 1)
    with pytest.raises(AlgebraMismatch):
        a.one + b.one


def test_scalars_are_exact():
    assert scalar("6/4") == Fraction(3, 2)
    assert scalar(Fraction(4, 2)) == 2 and isinstance(scalar(Fraction(4, 2)), int)
    with pytest.raises(TypeError):
        scalar(0.5)


def test_nonassociative_table_rejected():
    # a*a = b, a*b = a, b*b = 0: (aa)b = 0 but a(ab) = b
    with pytest.raises(ValueError):
        FinAlgebra(["1", "a", "b"],
                   [[[1, 0, 0], [0, 1, 0], [0, 0, 1]],
                    [[0, 1, 0], [0, 0, 1], [0, 1, 0]],
                    [[0, 0, 1], [0, 1, 0], [0, 0, 0]]], [1, 0, 0])


def test_noncommutative_table_rejected():
    with pytest.raises(ValueError):
        FinAlgebra(["1", "a", "b"],
                   [[[1, 0, 0], [0, 1, 0], [0, 0, 1]],
                    [[0, 1, 0], [0, 0, 0], [0, 1, 0]],
                    [[0, 0, 1], [0, 0, 0], [0, 0, 0]]], [1, 0, 0])


def test_quotient_operator_examples():
    alg, P, d = make_divided_power(2, 0)
    assert P(alg.basis(1)).is_zero()
    assert P(alg.basis(0)) == alg.basis(1)
    one, P1, _ = make_divided_power(1, 0)
    assert one.dim == 1 and P1.is_zero()
    with pytest.raises(ValueError):
        make_divided_power(0)


@pytest.mark.parametrize("m", range(1, 9))
@pytest.mark.parametrize("lam", [0, 1, -1, 2])
def test_quotient_operator_is_rota_baxter(m, lam):
    _, P, _ = make_divided_power(m, lam)
    assert is_rb_operator(P, lam)


@pytest.mark.parametrize("lam", [0, 1, -1])
def test_zero_operator_is_rota_baxter(lam):
    alg, _, _ = make_divided_power(3, lam)
    assert is_rb_operator(LinearOperator.zero(alg), lam)


def test_lowering_map_is_not_rota_baxter():
    alg, _, d = make_divided_power(3, 0)
    check = is_rb_operator(d, 0)
    assert not check
    # first failing pair (z0, z2): d(z0) d(z2) = 0 while d(z0 d(z2)) = d(z1) = z0
    assert check.witness == ("z0", "z2")


def test_diff_operator_examples():
    alg, _, d = make_divided_power(3, 0)
    assert is_diff_operator(LinearOperator.zero(alg), 0)
    # z1 z2 = 3 z3 = 0 in the quotient but d(z1) z2 + z1 d(z2) = 3 z2
    check = is_diff_operator(d, 0)
    assert not check
    one, _, d1 = make_divided_power(1, 0)
    assert is_diff_operator(d1, 0)
    poly = make_truncated_polynomial(4)
    assert is_diff_operator(polynomial_derivation(poly, [0, 0, 1, 0]), 0)


def test_diff_operator_needs_unit_killed():
    poly = make_truncated_polynomial(3)
    assert not is_diff_operator(LinearOperator.identity(poly), 0)


def test_omega_holds_examples():
    alg, P, d = make_divided_power(4, 0)
    zero = LinearOperator.zero(alg)
    assert omega_holds(zero, P, XY)
    check = omega_holds(d, P, FFTC)
    assert not check
    assert check.witness == ("z3",)
    assert omega_holds(P, P, COMMUTATOR)


def test_op_polynomial_examples():
    alg, P, _ = make_divided_power(2, 0)
    assert op_polynomial(P, []).is_zero()
    assert op_polynomial(P, [1]) == LinearOperator.identity(alg)
    assert op_polynomial(P, [0, 1]) == P


@given(st.lists(small, max_size=4), st.lists(small, max_size=4), weights)
def test_op_polynomial_is_linear_in_coefficients(a, b, lam):
    _, P, d = make_divided_power(4, lam)
    size = max(len(a), len(b))
    a_pad = a + [0] * (size - len(a))
    b_pad = b + [0] * (size - len(b))
    total = [x + y for x, y in zip(a_pad, b_pad)]
    for op in (P, d):
        assert op_polynomial(op, total) == op_polynomial(op, a) + op_polynomial(op, b)


@given(st.data(), st.integers(min_value=1, max_value=5), weights)
def test_product_is_commutative_and_associative(data, m, lam):
    alg, _, _ = make_divided_power(m, lam)
    x, y, z = (data.draw(elements(alg)) for _ in range(3))
    assert x * y == y * x
    assert (x * y) * z == x * (y * z)


def test_omega_trims_trailing_zeros():
    om = OmegaConstraint((1, 0, 0), (0,))
    assert om.phi == (1,) and om.psi == () and om.r == 0 and om.s is None
