"""Nuclear polynomial hull falsification and the characters it supports.

A point ``a`` lies outside the nuclear polynomially convex hull of ``K``
exactly when some scalar nuclear polynomial has ``|P(a)| > ||P||_K``.  The
search below looks for such a ``P`` among mixed-degree power sums with a
bounded number of functionals per degree.  Finding one is a proof; not
finding one only says nothing was found within the stated caps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import Character, require_character, scalar_algebra
from .errors import DimensionMismatchError, NotCertifiedError
from .norms import CompactSet, uniform_norm_on_K
from .polynomials import (
    PolynomialSum,
    PowerSumRep,
    as_polynomial_sum,
    compose_character_sum,
    product_polynomials,
)
from .search import DEFAULT_BUDGET, SearchBudget, maximize, real_to_complex

VIOLATION_TOL = 1e-9
CHARACTER_TOL = 1e-9

VIOLATED = "violated"
NO_VIOLATION = "no-violation-found"


@dataclass(frozen=True, eq=False)
class HullQuery:
    candidate: np.ndarray
    K: CompactSet
    degree_cap: int = 4
    terms_cap: int = 4
    budget: SearchBudget = DEFAULT_BUDGET

    def __post_init__(self):
        a = np.asarray(self.candidate, dtype=complex).reshape(-1)
        if a.shape[0] != self.K.space.dim:
            raise DimensionMismatchError("candidate dimension does not match K")
        if self.degree_cap < 1 or self.terms_cap < 1:
            raise ValueError("degree and terms caps must be >= 1")
        object.__setattr__(self, "candidate", a)


@dataclass(frozen=True, eq=False)
class HullCertificate:
    verdict: str
    witness: PolynomialSum | None
    margin: float
    ratio: float
    degree: int
    query: HullQuery = field(repr=False)

    @property
    def violated(self) -> bool:
        return self.verdict == VIOLATED

    def recheck(self) -> float:
        """Margin recomputed from the stored witness."""
        if self.witness is None:
            return self.margin
        val = abs(self.witness.evaluate(self.query.candidate)[0])
        return float(val - uniform_norm_on_K(self.witness, self.query.K))


def _layout(dim: int, degree: int, terms: int) -> int:
    return 2 + degree * terms * 2 * dim


def _unpack(params: np.ndarray, dim: int, degree: int, terms: int):
    params = np.atleast_2d(params)
    const = params[:, 0] + 1j * params[:, 1]
    funcs = real_to_complex_blocks(params[:, 2:], dim).reshape(params.shape[0], degree, terms, dim)
    return const, funcs


def real_to_complex_blocks(params: np.ndarray, dim: int) -> np.ndarray:
    blocks = params.reshape(params.shape[0], -1, 2 * dim)
    return real_to_complex(blocks).reshape(params.shape[0], -1)


def _poly_values(const, funcs, Z):
    # const: (N,), funcs: (N, D, T, d), Z: (M, d) -> (N, M)
    lin = np.einsum("ndtk,mk->ndtm", funcs, Z)
    powers = np.arange(1, funcs.shape[1] + 1)[None, :, None, None]
    return const[:, None] + np.sum(lin ** powers, axis=(1, 2))


def _witness(const, funcs, space, scale) -> PolynomialSum:
    C = scalar_algebra()
    parts = [PowerSumRep.constant_poly([const * scale], space, C)]
    for deg in range(1, funcs.shape[0] + 1):
        f = funcs[deg - 1]
        parts.append(PowerSumRep(deg, np.full(f.shape[0], scale, dtype=complex), f[:, None, :], space, C))
    return PolynomialSum(tuple(parts))


def hull_membership(q: HullQuery) -> HullCertificate:
    """Search for ``P`` with ``|P(a)| > ||P||_K``, degree by degree.

    Level ``D`` searches polynomials of degree ``<= D`` with its own seeded
    stream; the first level that beats ``1 + 1e-9`` in ``|P(a)| / ||P||_K``
    returns its best witness, rescaled to ``||P||_K = 1``.  Raising the
    degree cap only appends levels, so a violation never disappears.
    """
    K, a = q.K, q.candidate
    d = K.space.dim
    Z = np.vstack([K.points, a[None, :]])
    best_ratio, best_level = 0.0, 0
    for level in range(1, q.degree_cap + 1):
        def objective(params, level=level):
            const, funcs = _unpack(params, d, level, q.terms_cap)
            vals = np.abs(_poly_values(const, funcs, Z))
            sup_k = np.max(vals[:, :-1], axis=1)
            return np.where(sup_k > 0, vals[:, -1] / np.where(sup_k > 0, sup_k, 1.0), 0.0)

        ratio, x = maximize(objective, _layout(d, level, q.terms_cap), q.budget, stream=50 + level)
        if ratio > best_ratio:
            best_ratio, best_level = ratio, level
        if ratio > 1 + VIOLATION_TOL:
            const, funcs = _unpack(x, d, level, q.terms_cap)
            raw = _witness(const[0], funcs[0], K.space, 1.0)
            witness = _witness(const[0], funcs[0], K.space, 1.0 / uniform_norm_on_K(raw, K))
            margin = float(abs(witness.evaluate(a)[0]) - uniform_norm_on_K(witness, K))
            if margin > VIOLATION_TOL:
                return HullCertificate(VIOLATED, witness, margin, float(ratio), level, q)
    return HullCertificate(NO_VIOLATION, None, float(best_ratio - 1.0), float(best_ratio), best_level, q)


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------

def _require_certified(certificate: HullCertificate | None):
    if certificate is not None and certificate.violated:
        raise NotCertifiedError(
            f"candidate is outside the hull (margin {certificate.margin:.3e} at degree {certificate.degree})")


@dataclass(frozen=True, eq=False)
class PointCharacter:
    """Evaluation ``P -> P(a)`` on the span of ``generators``."""

    point: np.ndarray
    generators: tuple
    K: CompactSet
    multiplicative_residual: float
    bound_excess: float

    def __call__(self, P) -> complex:
        return complex(as_polynomial_sum(P).evaluate(self.point)[0])

    @property
    def values(self) -> np.ndarray:
        return np.array([self(P) for P in self.generators])


def _pair_residuals(generators, chi) -> float:
    worst = 0.0
    for i in range(len(generators)):
        for j in range(i, len(generators)):
            PQ = product_polynomials(generators[i], generators[j])
            worst = max(worst, abs(chi(PQ) - chi(generators[i]) * chi(generators[j])))
    return worst


def character_from_point(a, generators: Sequence, K: CompactSet,
                         certificate: HullCertificate | None = None,
                         tol: float = CHARACTER_TOL) -> PointCharacter:
    """Build and check the evaluation character at a hull point.

    Multiplicativity is checked on every generator pair, with products
    formed by :func:`product_polynomials`; the bound ``|P(a)| <= ||P||_K``
    is checked on every generator.
    """
    _require_certified(certificate)
    a = np.asarray(a, dtype=complex).reshape(-1)
    gens = tuple(as_polynomial_sum(P) for P in generators)
    for P in gens:
        if P.algebra.dim != 1:
            raise DimensionMismatchError("point characters act on scalar polynomials")
    chi = PointCharacter(a, gens, K, 0.0, 0.0)
    excess = max((abs(chi(P)) - uniform_norm_on_K(P, K) for P in gens), default=-np.inf)
    if excess > tol:
        raise NotCertifiedError(f"|P(a)| exceeds ||P||_K by {excess:.3e}: a is not certified in the hull")
    resid = _pair_residuals(gens, chi)
    return PointCharacter(a, gens, K, float(resid), float(excess))


@dataclass(frozen=True, eq=False)
class ProductCharacter:
    """``P -> phi(P(a))`` on algebra-valued generators."""

    point: np.ndarray
    character: Character
    generators: tuple
    K: CompactSet
    multiplicative_residual: float
    bound_excess: float

    def __call__(self, P) -> complex:
        scalar = compose_character_sum(self.character, P)
        return complex(scalar.evaluate(self.point)[0])

    def direct(self, P) -> complex:
        return complex(self.character(as_polynomial_sum(P).evaluate(self.point)))


def product_character(a, phi, generators: Sequence, K: CompactSet,
                      certificate: HullCertificate | None = None,
                      tol: float = CHARACTER_TOL) -> ProductCharacter:
    """``chi_{a, phi}(P) = phi(P(a))`` computed through ``phi o P``."""
    _require_certified(certificate)
    a = np.asarray(a, dtype=complex).reshape(-1)
    gens = tuple(as_polynomial_sum(P) for P in generators)
    if not gens:
        raise ValueError("need at least one generator")
    ch = require_character(gens[0].algebra, phi)
    chi = ProductCharacter(a, ch, gens, K, 0.0, 0.0)
    excess = max(abs(chi(P)) - uniform_norm_on_K(P, K) for P in gens)
    if excess > tol:
        raise NotCertifiedError(f"|phi(P(a))| exceeds ||P||_K by {excess:.3e}")
    resid = _pair_residuals(gens, chi)
    return ProductCharacter(a, ch, gens, K, float(resid), float(excess))
