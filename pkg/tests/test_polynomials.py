from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polyalg.algebra import FiniteSpace, NormSpec, make_pointwise_algebra, scalar_algebra
from polyalg.errors import DimensionMismatchError, InvalidCharacterError, NoPolarizationError
from polyalg.polynomials import (
    LinearOperator,
    PolynomialSum,
    PowerSumRep,
    SymmetricForm,
    absorb_weights,
    coalesce_terms,
    compose_character,
    eval_form,
    eval_power_sum,
    form_from_power_sum,
    leibniz_expand,
    linear_combination,
    multinomial,
    multiply_by_constant,
    multisets,
    polarize,
    product_polynomials,
    product_power_sums,
    root_of_unity_decomposition,
)
from polyalg.random_instances import cgauss, random_algebra, random_points, random_power_sum, random_space
from polyalg.suites import term_magnitude

seeds = st.integers(0, 2**32 - 1)


def instance(seed, degree=None, dE=None, dA=None):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5)) if degree is None else degree
    E = random_space(rng, int(rng.integers(1, 4)) if dE is None else dE)
    A = random_algebra(rng, int(rng.integers(1, 4)) if dA is None else dA)
    return rng, random_power_sum(rng, n, E, A)


def rel_err(P, got, want, X):
    return float(np.max(P.algebra.norm_of(got - want) / np.maximum(term_magnitude(P, X), 1e-300)))


# -- evaluation ------------------------------------------------------------------

def test_square_at_three():
    E = FiniteSpace(1, NormSpec.sup())
    P = PowerSumRep.nuclear(2, [[1.0]], E)
    np.testing.assert_array_equal(P.evaluate(np.array([3.0])), [9.0])
    assert eval_power_sum(P, np.array([3.0]))[0] == 9


def test_evaluate_batch_and_single_agree(rng):
    _, P = instance(5)
    X = random_points(rng, 4, P.space)
    batch = P.evaluate(X)
    for x, v in zip(X, batch):
        np.testing.assert_allclose(P.evaluate(x), v, rtol=1e-14)


def test_dimension_checks():
    E = FiniteSpace(2, NormSpec.pnorm(2))
    P = PowerSumRep.nuclear(2, [[1, 0]], E)
    with pytest.raises(DimensionMismatchError):
        P.evaluate(np.ones(3))
    with pytest.raises(DimensionMismatchError):
        PowerSumRep(2, [1, 2], np.ones((1, 1, 2)), E, scalar_algebra())
    other = PowerSumRep.nuclear(1, [[1, 0, 0]], FiniteSpace(3, NormSpec.sup()))
    with pytest.raises(DimensionMismatchError):
        product_power_sums(P, other)


@given(seeds, st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_homogeneity(seed, lam):
    rng, P = instance(seed)
    x = random_points(rng, 1, P.space)[0]
    want = lam ** P.degree * P.evaluate(x)
    got = P.evaluate(lam * x)
    scale = abs(lam) ** P.degree * term_magnitude(P, x)[0]
    assert float(P.algebra.norm_of(got - want)) <= 1e-12 * max(scale, 1e-300)


# -- polarization ----------------------------------------------------------------

@given(seeds)
def test_polarization_recovers_polynomial(seed):
    rng, P = instance(seed)
    X = random_points(rng, 20, P.space, radius=2.0)
    T = polarize(P)
    assert rel_err(P, eval_form(T, *([X] * P.degree)), P.evaluate(X), X) <= 1e-10


@given(seeds)
def test_polarization_matches_direct_expansion(seed):
    _, P = instance(seed)
    T, D = polarize(P), form_from_power_sum(P)
    for k in D.coeffs:
        np.testing.assert_allclose(T.coeffs[k], D.coeffs[k], atol=1e-11 * (1 + np.max(np.abs(D.coeffs[k]))))


@given(seeds)
def test_polarized_form_is_symmetric(seed):
    rng, P = instance(seed, degree=3)
    T = polarize(P)
    xs = random_points(rng, 3, P.space)
    base = T.evaluate(*xs)
    for perm in [(1, 0, 2), (2, 1, 0), (0, 2, 1)]:
        np.testing.assert_allclose(T.evaluate(*xs[list(perm)]), base, atol=1e-12)


def test_polarization_of_constant_rejected():
    E = FiniteSpace(1, NormSpec.sup())
    with pytest.raises(NoPolarizationError):
        polarize(PowerSumRep.constant_poly([1.0], E, scalar_algebra()))


def test_bilinear_example():
    # P(x) = (x1 + x2)^2 - (x1 - x2)^2 = 4 x1 x2, so T(e1, e2) = 2
    E = FiniteSpace(2, NormSpec.pnorm(2))
    P = PowerSumRep.nuclear(2, [[1, 1], [1, -1]], E, weights=[1, -1])
    T = polarize(P)
    assert T.coeffs[(0, 1)][0] == pytest.approx(2.0)
    assert abs(T.coeffs[(0, 0)][0]) < 1e-15 and abs(T.coeffs[(1, 1)][0]) < 1e-15


def test_multisets_and_multinomial():
    assert multisets(2, 2) == [(0, 0), (0, 1), (1, 1)]
    assert len(multisets(3, 4)) == math.comb(6, 4)
    assert multinomial((0, 0, 1)) == 3
    assert multinomial(()) == 1


def test_fix_last_matches_full_evaluation(rng):
    _, P = instance(11, degree=3, dE=3)
    T = polarize(P)
    x, y, z = random_points(rng, 3, P.space)
    sub = T.fix_last([y, z])
    np.testing.assert_allclose(sub.evaluate(x), T.evaluate(x, y, z), atol=1e-12)


# -- Leibniz -------------------------------------------------------------------------

@given(seeds)
def test_leibniz_sums_to_shifted_value(seed):
    rng, P = instance(seed)
    T = polarize(P)
    x, y = random_points(rng, 2, P.space, radius=2.0)
    terms = leibniz_expand(T, x, y)
    assert [c for c, _ in terms] == [math.comb(P.degree, k) for k in range(P.degree + 1)]
    total = sum(c * v for c, v in terms)
    scale = sum(c * float(P.algebra.norm_of(v)) for c, v in terms)
    assert float(P.algebra.norm_of(total - T.diagonal(x + y))) <= 1e-10 * max(scale, 1e-300)


def test_leibniz_with_zero_isolates_top_term(rng):
    _, P = instance(3, degree=4)
    T = polarize(P)
    x = random_points(rng, 1, P.space)[0]
    terms = leibniz_expand(T, x, np.zeros_like(x))
    for _, v in terms[:-1]:
        assert np.all(v == 0)
    assert terms[-1][0] == 1
    np.testing.assert_array_equal(terms[-1][1], T.diagonal(x))


def test_leibniz_includes_k_zero_term(rng):
    # dropping k = 0 would lose T(y^n) = P(y)
    _, P = instance(8, degree=2)
    T = polarize(P)
    y = random_points(rng, 1, P.space)[0]
    terms = leibniz_expand(T, np.zeros_like(y), y)
    np.testing.assert_allclose(terms[0][1], P.evaluate(y), atol=1e-12)


# -- products ---------------------------------------------------------------------

@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_product_identity(seed, m, n):
    if m + n > 5:
        n = 5 - m
    rng = np.random.default_rng(seed)
    E, A = random_space(rng, 2), random_algebra(rng, 2)
    P, Q = random_power_sum(rng, m, E, A), random_power_sum(rng, n, E, A)
    PQ = product_power_sums(P, Q)
    assert PQ.degree == m + n
    assert PQ.n_terms == P.n_terms * Q.n_terms * 2 ** (m + n)
    X = random_points(rng, 30, E, radius=2.0)
    assert rel_err(PQ, PQ.evaluate(X), A.mul(P.evaluate(X), Q.evaluate(X)), X) <= 1e-10


def test_product_of_linear_forms_example():
    # m = n = 1: four sign patterns reproduce x1 x2
    E = FiniteSpace(2, NormSpec.pnorm(2))
    P = PowerSumRep.nuclear(1, [[1, 0]], E)
    Q = PowerSumRep.nuclear(1, [[0, 1]], E)
    PQ = product_power_sums(P, Q)
    assert PQ.n_terms == 4
    x = np.array([2.0 - 1j, 0.5 + 3j])
    assert PQ.evaluate(x)[0] == pytest.approx(x[0] * x[1], abs=1e-14)


def test_product_with_constant_uses_constant_multiplication(rng):
    E = FiniteSpace(2, NormSpec.pnorm(1))
    A = make_pointwise_algebra(2, NormSpec.sup())
    P = random_power_sum(rng, 3, E, A)
    c = PowerSumRep.constant_poly([2.0, -1j], E, A)
    X = random_points(rng, 5, E)
    for PQ in (product_power_sums(P, c), product_power_sums(c, P)):
        assert PQ.degree == 3
        np.testing.assert_allclose(PQ.evaluate(X), P.evaluate(X) * np.array([2.0, -1j]), atol=1e-12)


def test_mixed_degree_product(rng):
    E = FiniteSpace(2, NormSpec.pnorm(2))
    A = make_pointwise_algebra(2, NormSpec.pnorm(2))
    P = PolynomialSum.of(*(random_power_sum(rng, d, E, A) for d in range(3)))
    Q = PolynomialSum.of(*(random_power_sum(rng, d, E, A) for d in (0, 2)))
    PQ = product_polynomials(P, Q)
    X = random_points(rng, 10, E)
    np.testing.assert_allclose(PQ.evaluate(X), P.evaluate(X) * Q.evaluate(X), atol=1e-11)
    assert sorted(p.degree for p in PQ.parts) == [0, 1, 2, 3, 4]


# -- roots of unity and constants -------------------------------------------------------

@pytest.mark.parametrize("m", range(2, 7))
def test_roots_of_unity_decomposition(m, rng):
    A = random_algebra(rng, 3)
    b = 2 * cgauss(rng, 3)
    parts = root_of_unity_decomposition(A, b, m)
    assert len(parts) == m
    total = sum(A.power(x, m) for x in parts)
    assert float(A.norm_of(total - b)) <= 1e-12 * max(1.0, float(A.norm_of(b)))


def test_roots_of_unity_needs_m_at_least_two():
    A = make_pointwise_algebra(1, NormSpec.sup())
    with pytest.raises(ValueError):
        root_of_unity_decomposition(A, [1.0], 1)


@pytest.mark.parametrize("m", range(1, 7))
def test_multiply_by_constant(m, rng):
    E, A = random_space(rng, 2), random_algebra(rng, 2)
    P = random_power_sum(rng, m, E, A)
    b = cgauss(rng, 2)
    bP = multiply_by_constant(P, b)
    assert bP.degree == m
    X = random_points(rng, 10, E)
    assert rel_err(bP, bP.evaluate(X), A.mul(P.evaluate(X), b), X) <= 1e-10


# -- characters and rewriting ---------------------------------------------------------

def test_compose_character(rng):
    E = FiniteSpace(2, NormSpec.pnorm(2))
    A = make_pointwise_algebra(3, NormSpec.sup())
    P = random_power_sum(rng, 3, E, A)
    X = random_points(rng, 6, E)
    for k in range(3):
        phiP = compose_character(np.eye(3)[k], P)
        assert phiP.algebra.dim == 1
        np.testing.assert_allclose(phiP.evaluate(X)[:, 0], P.evaluate(X)[:, k], atol=1e-12)
    with pytest.raises(InvalidCharacterError):
        compose_character([1, 1, 0], P)


def test_absorb_weights_preserves_values(rng):
    _, P = instance(21, degree=3)
    Q = absorb_weights(P)
    assert np.all(Q.weights == 1)
    X = random_points(rng, 5, P.space)
    np.testing.assert_allclose(Q.evaluate(X), P.evaluate(X), atol=1e-11)


def test_coalesce_merges_proportional_terms():
    E = FiniteSpace(2, NormSpec.pnorm(2))
    P = PowerSumRep.nuclear(2, [[1, 2], [2, 4], [0, 1]], E, weights=[1, 0.5, 3])
    Q = coalesce_terms(P)
    assert Q.n_terms == 2
    x = np.array([0.3, -1.2j])
    np.testing.assert_allclose(Q.evaluate(x), P.evaluate(x), atol=1e-13)


def test_linear_combination(rng):
    E = FiniteSpace(1, NormSpec.sup())
    P = PowerSumRep.nuclear(2, [[1.0]], E)
    Q = PowerSumRep.nuclear(1, [[1.0]], E)
    R = linear_combination([(2.0, P), (-1.0, Q)])
    assert R.evaluate(np.array([3.0]))[0] == pytest.approx(15.0)


def test_operator_and_form_construction():
    E = FiniteSpace(2, NormSpec.pnorm(2))
    A = make_pointwise_algebra(2, NormSpec.sup())
    op = LinearOperator(np.array([[1, 2], [3, 4]]), E, A)
    np.testing.assert_allclose(op(np.array([1, 1])), [3, 7])
    P = PowerSumRep.from_operators(2, [op, op], [1, -1])
    np.testing.assert_allclose(P.evaluate(np.array([1, 1])), [0, 0])
    T = SymmetricForm(1, {(0,): np.array([1, 0]), (1,): np.array([0, 1])}, E, A)
    np.testing.assert_allclose(T.evaluate(np.array([2, 5])), [2, 5])
