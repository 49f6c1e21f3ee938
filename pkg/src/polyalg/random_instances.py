"""Seeded random spaces, algebras, polynomials and point clouds."""

from __future__ import annotations

import numpy as np

from .algebra import (
    FiniteBanachAlgebra,
    FiniteSpace,
    NormSpec,
    make_lourenco_algebra,
    make_pointwise_algebra,
    vector_norm,
)
from .norms import CompactSet
from .polynomials import PolynomialSum, PowerSumRep

NORM_CHOICES = (1.0, 2.0, 3.0, np.inf)


def cgauss(rng: np.random.Generator, *shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_norm(rng: np.random.Generator) -> NormSpec:
    return NormSpec.pnorm(NORM_CHOICES[rng.integers(len(NORM_CHOICES))])


def random_space(rng: np.random.Generator, dim: int) -> FiniteSpace:
    return FiniteSpace(dim, random_norm(rng))


def random_lourenco_algebra(rng: np.random.Generator, dim: int) -> FiniteBanachAlgebra:
    E = random_space(rng, dim)
    e = cgauss(rng, dim)
    e = e / vector_norm(E.norm, e)
    psi = cgauss(rng, dim)
    while abs(psi @ e) < 0.1:
        psi = cgauss(rng, dim)
    return make_lourenco_algebra(E, psi, e)


def random_algebra(rng: np.random.Generator, dim: int, lourenco: bool = True) -> FiniteBanachAlgebra:
    """Pointwise algebra with a random p-norm; for ``dim >= 2`` sometimes a Lourenco algebra."""
    if lourenco and dim >= 2 and rng.random() < 0.3:
        return random_lourenco_algebra(rng, dim)
    return make_pointwise_algebra(dim, random_norm(rng))


def random_power_sum(rng: np.random.Generator, degree: int, E: FiniteSpace, A: FiniteBanachAlgebra,
                     terms: int | None = None) -> PowerSumRep:
    if degree == 0:
        return PowerSumRep.constant_poly(cgauss(rng, A.dim), E, A)
    r = int(rng.integers(1, 4)) if terms is None else terms
    mats = cgauss(rng, r, A.dim, E.dim) / np.sqrt(E.dim)
    return PowerSumRep(degree, cgauss(rng, r), mats, E, A)


def random_polynomial(rng: np.random.Generator, max_degree: int, E: FiniteSpace,
                      A: FiniteBanachAlgebra) -> PolynomialSum:
    """Mixed-degree polynomial with every degree ``0..max_degree`` present."""
    return PolynomialSum.of(*(random_power_sum(rng, d, E, A) for d in range(max_degree + 1)))


def random_points(rng: np.random.Generator, n: int, E: FiniteSpace, radius: float = 1.0) -> np.ndarray:
    """``n`` points with norms spread over ``(0, radius]``."""
    z = cgauss(rng, n, E.dim)
    z = z / E.norm_of(z)[:, None]
    return z * (radius * rng.uniform(0.05, 1.0, size=n))[:, None]


def random_compact(rng: np.random.Generator, n: int, E: FiniteSpace, radius: float = 1.0) -> CompactSet:
    return CompactSet(random_points(rng, n, E, radius), E)


def circle(n: int = 64, radius: float = 1.0) -> CompactSet:
    pts = radius * np.exp(2j * np.pi * np.arange(n) / n)[:, None]
    return CompactSet(pts, FiniteSpace(1, NormSpec.sup()))
