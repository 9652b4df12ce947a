from math import comb

import pytest
from hypothesis import given, strategies as st

from optransport.algebra import (
    COMMUTATOR,
    FFTC,
    XY,
    AlgebraMismatch,
    LinearOperator,
    NotAHomomorphism,
    OmegaConstraint,
    make_divided_power,
    make_truncated_polynomial,
    polynomial_derivation,
)
from optransport.hurwitz import (
    Coextension,
    FiniteSupportSeries,
    HorizonExceeded,
    PrefixSeries,
    coextend,
    coextend_closed_form,
    coextension_demand,
    cofree_lift,
    delta_series,
    h_component,
    h_comultiply,
    h_delta,
    h_epsilon,
    h_eta,
    h_mul,
    h_partial,
    h_shift,
    unit_series,
    zero_series,
)

from .strategies import finite_series, fixture_and_series, omegas, weights


def test_component_access():
    alg, _, _ = make_divided_power(3, 0)
    f = FiniteSupportSeries(alg, 0, {1: alg.basis(0)})
    assert h_component(f, 1) == alg.basis(0)
    assert h_component(f, 5).is_zero()
    prefix = PrefixSeries(alg, 0, [alg.one] * 3)
    with pytest.raises(HorizonExceeded):
        h_component(prefix, 3)


def test_unit_series_is_neutral():
    alg, _, _ = make_divided_power(3, 1)
    f = FiniteSupportSeries(alg, 1, {0: [1, 2, 0], 2: [0, 1, 1], 4: [3, 0, 0]})
    prod = h_mul(f, unit_series(alg, 1))
    assert all(prod[n] == f[n] for n in range(8))


@given(st.data(), st.integers(min_value=1, max_value=3))
def test_weight_zero_product_is_binomial(data, m):
    alg, _, _ = make_divided_power(m, 0)
    f = data.draw(finite_series(alg, 0))
    g = data.draw(finite_series(alg, 0))
    prod = f * g
    for n in range(7):
        expected = alg.zero
        for j in range(n + 1):
            expected = expected + comb(n, j) * (f[n - j] * g[j])
        assert prod[n] == expected


def test_product_agrees_with_shift_recursion():
    alg, _, _ = make_divided_power(3, 1)
    f = delta_series(alg, 1, 1)
    g = delta_series(alg, 1, 1)
    fg = f * g
    df, dg = h_partial(f), h_partial(g)
    # (fg)_{n+1} = (∂f g + f ∂g + λ ∂f ∂g)_n
    rhs = df * g + f * dg + (df * dg).scale(1)
    for n in range(4):
        assert fg[n + 1] == rhs[n]


def test_mismatched_weights_rejected():
    a, _, _ = make_divided_power(2, 0)
    f = unit_series(a, 0)
    g = unit_series(a, 1)
    with pytest.raises(AlgebraMismatch):
        h_mul(f, g)


def test_partial_examples():
    alg, _, _ = make_divided_power(3, 0)
    x = alg.basis(2)
    assert all(h_partial(FiniteSupportSeries(alg, 0, {0: x}))[n].is_zero() for n in range(4))
    shifted = h_partial(FiniteSupportSeries(alg, 0, {3: x}))
    assert shifted.entries == {2: x.coords}
    assert all(h_partial(unit_series(alg, 0))[n].is_zero() for n in range(4))
    prefix = PrefixSeries(alg, 0, [x, x, x])
    assert h_partial(prefix).horizon == 2


def test_epsilon_examples():
    alg, _, _ = make_divided_power(3, 0)
    x = alg.basis(1)
    assert h_epsilon(unit_series(alg, 0)) == alg.one
    f = FiniteSupportSeries(alg, 0, {1: x})
    assert h_epsilon(f).is_zero()
    assert h_epsilon(h_partial(f)) == x
    with pytest.raises(HorizonExceeded):
        h_epsilon(PrefixSeries(alg, 0, []))


def test_eta_examples():
    alg, _, d = make_divided_power(3, 0)
    z2 = alg.basis(2)
    series = h_eta(d, z2)
    assert [series[n] for n in range(4)] == [alg.basis(2), alg.basis(1), alg.basis(0), alg.zero]
    zero_d = h_eta(LinearOperator.zero(alg), z2)
    assert zero_d[0] == z2 and zero_d[3].is_zero()
    const = h_eta(LinearOperator.identity(alg), z2)
    assert all(const[n] == z2 for n in range(5))


def test_delta_examples():
    alg, _, _ = make_divided_power(3, 0)
    f = FiniteSupportSeries(alg, 0, {2: [1, 1, 0], 5: [0, 0, 1]})
    assert h_delta(f, 0, 5) == f[5]
    assert h_delta(f, 2, 0) == f[2]
    assert h_delta(unit_series(alg, 0), 2, 3).is_zero()
    assert h_comultiply(f)(3)[2] == f[5]


def test_coextension_closed_forms():
    alg, P, _ = make_divided_power(4, 0)
    f = FiniteSupportSeries(alg, 0, {0: [1, 0, 2, 0], 1: [0, 1, 0, 0], 3: [1, 1, 1, 1]})
    fftc = coextend(P, FFTC, f)
    assert fftc[0] == P(f[0])
    assert all(fftc[n + 1] == f[n] for n in range(8))
    comm = coextend(P, COMMUTATOR, f)
    assert all(comm[n] == P(f[n]) for n in range(8))
    xy = coextend(P, XY, f)
    assert xy[0] == P(f[0]) and all(xy[n].is_zero() for n in range(1, 8))


def test_coextension_horizon():
    alg, P, _ = make_divided_power(2, 0)
    omega = OmegaConstraint((0, 1), (0, 0, 1))  # r = 1, s = 2
    prefix = PrefixSeries(alg, 0, [alg.one] * 5)
    image = coextend(P, omega, prefix)
    demand = [coextension_demand(omega, n) for n in range(5)]
    assert demand == [0, 2, 4, 6, 8]
    assert image.horizon == 3
    image[2]
    with pytest.raises(HorizonExceeded):
        image[3]


def test_demand_of_trivial_constraint():
    # components n ≥ 1 of the coextension along xy read no input at all
    assert coextension_demand(XY, 0) == 0
    assert coextension_demand(XY, 4) == -1
    alg, P, _ = make_divided_power(2, 0)
    assert Coextension(P, XY).output_horizon(PrefixSeries(alg, 0, [alg.one])) == float("inf")


def test_cofree_lift_examples():
    alg, _, d = make_divided_power(3, 0)
    ident = LinearOperator.identity(alg)
    lift = cofree_lift(d, ident, alg.basis(2))
    assert [lift[n] for n in range(4)] == [alg.basis(2), alg.basis(1), alg.basis(0), alg.zero]
    zero = cofree_lift(LinearOperator.zero(alg), ident, alg.basis(1))
    assert zero[0] == alg.basis(1) and zero[1].is_zero()
    assert cofree_lift(d, ident, alg.one)[1].is_zero()
    with pytest.raises(NotAHomomorphism):
        cofree_lift(d, d, alg.one)


@given(fixture_and_series(count=2))
def test_product_is_commutative(data):
    alg, lam, _, f, g = data
    fg, gf = f * g, g * f
    assert all(fg[n] == gf[n] for n in range(7))


@given(fixture_and_series(count=3))
def test_product_is_associative(data):
    alg, lam, _, f, g, h = data
    left, right = (f * g) * h, f * (g * h)
    assert all(left[n] == right[n] for n in range(6))


@given(fixture_and_series(count=2))
def test_shift_is_weighted_derivation(data):
    alg, lam, _, f, g = data
    lhs = h_partial(f * g)
    df, dg = h_partial(f), h_partial(g)
    rhs = df * g + f * dg + (df * dg).scale(lam)
    assert all(lhs[n] == rhs[n] for n in range(6))


@given(fixture_and_series(count=1), omegas)
def test_coextension_satisfies_its_relation(data, omega):
    alg, lam, P, f = data
    image = coextend(P, omega, f)
    for n in range(4):
        rhs = alg.zero
        for i, a in enumerate(omega.phi):
            rhs = rhs + a * f[n + i]
        for j, b in enumerate(omega.psi):
            rhs = rhs + b * coextend(P, omega, h_shift(f, j))[n]
        assert image[n + 1] == rhs


@given(fixture_and_series(count=1),
       st.lists(st.integers(-2, 2), max_size=3).map(tuple),
       st.lists(st.integers(-2, 2), max_size=3).map(tuple))
def test_recurrence_matches_closed_form(data, phi, psi):
    alg, lam, P, f = data
    omega = OmegaConstraint(phi, psi)
    image = coextend(P, omega, f)
    for n in range(6):
        assert image[n] == coextend_closed_form(P, omega, f, n)


@given(st.integers(min_value=3, max_value=6), st.data())
def test_eta_intertwines_derivations(m, data):
    poly = make_truncated_polynomial(m)
    image = data.draw(st.lists(st.integers(-2, 2), min_size=m, max_size=m))
    image[0] = 0
    d = polynomial_derivation(poly, image)
    x = poly.element(data.draw(st.lists(st.integers(-2, 2), min_size=m, max_size=m)))
    series = h_eta(d, x)
    shifted = h_partial(series)
    after = h_eta(d, d(x))
    assert all(shifted[n] == after[n] for n in range(6))


@given(fixture_and_series(count=1))
def test_comultiplication_indices(data):
    alg, lam, _, f = data
    rows = h_comultiply(f)
    for n in range(4):
        assert rows(n)[0] == f[n] and rows(0)[n] == f[n]
        for m in range(4):
            for p in range(4):
                assert h_comultiply(rows(n))(m)[p] == f[n + m + p]
