from __future__ import annotations

import numpy as np
import pytest

from polyalg.algebra import FiniteSpace, NormSpec, make_pointwise_algebra
from polyalg.errors import DimensionMismatchError, InvalidCharacterError, NotCertifiedError
from polyalg.hulls import (
    NO_VIOLATION,
    VIOLATED,
    HullQuery,
    character_from_point,
    hull_membership,
    product_character,
)
from polyalg.norms import CompactSet, uniform_norm_on_K
from polyalg.polynomials import PolynomialSum, PowerSumRep
from polyalg.random_instances import circle, random_polynomial
from polyalg.search import SearchBudget

FAST = SearchBudget(samples=256, refine_steps=60, seed=11)


@pytest.fixture(scope="module")
def K():
    return circle(64)


def test_outside_point_violated_by_linear_witness(K):
    cert = hull_membership(HullQuery(np.array([2.0]), K, degree_cap=2, terms_cap=2, budget=FAST))
    assert cert.verdict == VIOLATED and cert.violated
    assert cert.degree == 1 and cert.margin >= 0.9
    # the witness is normalized on K and its stored margin is reproducible
    assert uniform_norm_on_K(cert.witness, K) == pytest.approx(1.0, rel=1e-12)
    assert cert.recheck() == pytest.approx(cert.margin, abs=1e-12)


def test_centre_not_violated(K):
    cert = hull_membership(HullQuery(np.zeros(1), K, degree_cap=2, terms_cap=2, budget=FAST))
    assert cert.verdict == NO_VIOLATION and cert.witness is None
    assert cert.ratio <= 1 + 1e-9


def test_point_of_K_never_violated(K):
    cert = hull_membership(HullQuery(K.points[7], K, degree_cap=2, terms_cap=2, budget=FAST))
    assert cert.verdict == NO_VIOLATION
    assert cert.ratio == pytest.approx(1.0, abs=1e-12)


def test_violation_persists_when_degree_cap_grows(K):
    a = np.array([1.5j])
    low = hull_membership(HullQuery(a, K, degree_cap=1, terms_cap=2, budget=FAST))
    high = hull_membership(HullQuery(a, K, degree_cap=3, terms_cap=2, budget=FAST))
    assert low.violated and high.violated
    assert high.degree == low.degree and high.margin == low.margin


def test_two_point_set_excludes_midpoint():
    # K = {1, -1}: z^2 - 1 vanishes on K but not at 0, so 0 is outside the hull
    K = CompactSet([[1.0], [-1.0]], FiniteSpace(1, NormSpec.sup()))
    cert = hull_membership(HullQuery(np.zeros(1), K, degree_cap=2, terms_cap=2, budget=FAST))
    assert cert.violated and cert.degree == 2


def test_query_validation(K):
    with pytest.raises(DimensionMismatchError):
        HullQuery(np.zeros(2), K)
    with pytest.raises(ValueError):
        HullQuery(np.zeros(1), K, degree_cap=0)


def test_deterministic_certificate(K):
    q = HullQuery(np.array([1.2]), K, degree_cap=2, terms_cap=2, budget=FAST)
    a, b = hull_membership(q), hull_membership(q)
    assert (a.verdict, a.margin, a.ratio, a.degree) == (b.verdict, b.margin, b.ratio, b.degree)


# -- characters ------------------------------------------------------------------------------

def _scalar_generators(E):
    z = PowerSumRep.nuclear(1, [[1.0]], E)
    z2 = PowerSumRep.nuclear(2, [[1.0]], E, weights=[0.5])
    one = PowerSumRep.constant_poly([1.0], E, z.algebra)
    return [PolynomialSum.of(z, one), PolynomialSum.of(z2), z]


def test_point_character_inside(K):
    a = np.array([0.25 - 0.1j])
    cert = hull_membership(HullQuery(a, K, degree_cap=2, terms_cap=2, budget=FAST))
    chi = character_from_point(a, _scalar_generators(K.space), K, certificate=cert)
    assert chi.multiplicative_residual <= 1e-12
    assert chi.bound_excess <= 0
    np.testing.assert_allclose(chi.values, [a[0] + 1, 0.5 * a[0] ** 2, a[0]], atol=1e-14)


def test_point_character_refuses_outside_points(K):
    a = np.array([2.0])
    cert = hull_membership(HullQuery(a, K, degree_cap=1, terms_cap=1, budget=FAST))
    with pytest.raises(NotCertifiedError):
        character_from_point(a, _scalar_generators(K.space), K, certificate=cert)
    # without a certificate the generator bound check still catches it
    with pytest.raises(NotCertifiedError):
        character_from_point(a, _scalar_generators(K.space), K)


def test_product_character(K, rng):
    A = make_pointwise_algebra(2, NormSpec.pnorm(2))
    gens = [random_polynomial(rng, 2, K.space, A) for _ in range(3)]
    a = np.zeros(1)
    cert = hull_membership(HullQuery(a, K, degree_cap=2, terms_cap=2, budget=FAST))
    for k in range(2):
        chi = product_character(a, np.eye(2)[k], gens, K, certificate=cert)
        assert chi.multiplicative_residual <= 1e-9
        assert chi.bound_excess <= 1e-9
        for P in gens:
            assert chi(P) == pytest.approx(chi.direct(P), abs=1e-12)
            assert chi(P) == pytest.approx(P.evaluate(a)[k], abs=1e-12)


def test_product_character_needs_a_character(K, rng):
    A = make_pointwise_algebra(2, NormSpec.pnorm(2))
    gens = [random_polynomial(rng, 1, K.space, A)]
    with pytest.raises(InvalidCharacterError):
        product_character(np.zeros(1), [0.5, 0.5], gens, K)
