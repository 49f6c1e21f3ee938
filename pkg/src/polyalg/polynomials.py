"""Algebra-valued polynomials generated by linear operators.

A homogeneous polynomial of degree ``n`` is kept as a weighted power sum
``P(x) = sum_i w_i T_i(x)^n`` where ``T_i : C^dE -> A`` are matrices and the
power is taken in the algebra ``A``.  Scalar (nuclear) polynomials are the
case ``A = C``.  Products and constant multiples are formed by the explicit
polarization and roots-of-unity constructions, never by symbolic expansion,
so every result is again a power sum.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .algebra import (
    Character,
    FiniteBanachAlgebra,
    FiniteSpace,
    NormSpec,
    require_character,
    scalar_algebra,
)
from .errors import DimensionMismatchError, NoPolarizationError


@dataclass(frozen=True, eq=False)
class LinearOperator:
    matrix: np.ndarray  # (dim A, dim E)
    space: FiniteSpace
    algebra: FiniteBanachAlgebra

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.shape != (self.algebra.dim, self.space.dim):
            raise DimensionMismatchError(
                f"operator matrix {m.shape} does not map dim {self.space.dim} into dim {self.algebra.dim}")

    def __call__(self, x):
        return np.asarray(x, dtype=complex) @ self.matrix.T


@dataclass(frozen=True, eq=False)
class PowerSumRep:
    """``sum_i weights[i] * (matrices[i] @ x)^degree`` in ``algebra``.

    For ``degree == 0`` the polynomial is the constant ``constant``.
    """

    degree: int
    weights: np.ndarray
    matrices: np.ndarray
    space: FiniteSpace
    algebra: FiniteBanachAlgebra
    constant: np.ndarray | None = None

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        dA, dE = self.algebra.dim, self.space.dim
        if self.degree == 0:
            c = np.zeros(dA, dtype=complex) if self.constant is None else np.asarray(self.constant, dtype=complex)
            if c.shape != (dA,):
                raise DimensionMismatchError("constant must be an algebra element")
            object.__setattr__(self, "constant", c)
            object.__setattr__(self, "weights", np.zeros(0, dtype=complex))
            object.__setattr__(self, "matrices", np.zeros((0, dA, dE), dtype=complex))
            return
        w = np.asarray(self.weights, dtype=complex).reshape(-1)
        m = np.asarray(self.matrices, dtype=complex).reshape(-1, dA, dE) if np.size(self.matrices) else \
            np.zeros((0, dA, dE), dtype=complex)
        if m.shape[0] != w.shape[0]:
            raise DimensionMismatchError("one weight per operator required")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "matrices", m)

    # -- constructors ------------------------------------------------------
    @classmethod
    def from_operators(cls, degree: int, operators: Sequence[LinearOperator],
                       weights: Sequence[complex] | None = None) -> PowerSumRep:
        if not operators:
            raise ValueError("need at least one operator")
        space, algebra = operators[0].space, operators[0].algebra
        for op in operators:
            if op.space is not space or op.algebra is not algebra:
                raise DimensionMismatchError("operators must share source and target")
        w = np.ones(len(operators)) if weights is None else weights
        return cls(degree, w, np.stack([op.matrix for op in operators]), space, algebra)

    @classmethod
    def constant_poly(cls, value, space: FiniteSpace, algebra: FiniteBanachAlgebra) -> PowerSumRep:
        return cls(0, [], [], space, algebra, constant=value)

    @classmethod
    def nuclear(cls, degree: int, functionals, space: FiniteSpace, weights=None) -> PowerSumRep:
        """Scalar power sum ``sum_i w_i psi_i(x)^degree``."""
        f = np.atleast_2d(np.asarray(functionals, dtype=complex))
        w = np.ones(len(f)) if weights is None else weights
        return cls(degree, w, f[:, None, :], space, scalar_algebra())

    # -- accessors ---------------------------------------------------------
    @property
    def terms(self) -> list[tuple[complex, LinearOperator]]:
        return [(complex(w), LinearOperator(m, self.space, self.algebra))
                for w, m in zip(self.weights, self.matrices)]

    @property
    def n_terms(self) -> int:
        return len(self.weights)

    @property
    def is_scalar(self) -> bool:
        return self.algebra.dim == 1

    def evaluate(self, X) -> np.ndarray:
        """Values at the rows of ``X`` (shape ``(N, dim E)``) -> ``(N, dim A)``."""
        X = np.asarray(X, dtype=complex)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[-1] != self.space.dim:
            raise DimensionMismatchError(f"point has dim {X.shape[-1]}, space dim {self.space.dim}")
        if self.degree == 0:
            out = np.broadcast_to(self.constant, (X.shape[0], self.algebra.dim)).copy()
        elif self.n_terms == 0:
            out = np.zeros((X.shape[0], self.algebra.dim), dtype=complex)
        else:
            Y = np.einsum("rae,ne->nra", self.matrices, X)
            if self.is_scalar:
                out = np.einsum("r,nra->na", self.weights, Y ** self.degree)
            else:
                out = np.einsum("r,nra->na", self.weights, self.algebra.power(Y, self.degree))
        return out[0] if single else out

    def __call__(self, x):
        return self.evaluate(x)

    def scaled(self, c: complex) -> PowerSumRep:
        if self.degree == 0:
            return PowerSumRep.constant_poly(c * self.constant, self.space, self.algebra)
        return PowerSumRep(self.degree, c * self.weights, self.matrices, self.space, self.algebra)


def _same_domain(P, Q):
    if P.space is not Q.space and (P.space.dim != Q.space.dim):
        raise DimensionMismatchError("polynomials live on different spaces")
    if P.algebra is not Q.algebra and P.algebra.dim != Q.algebra.dim:
        raise DimensionMismatchError("polynomials take values in different algebras")


def concat_terms(P: PowerSumRep, Q: PowerSumRep) -> PowerSumRep:
    """Sum of two power sums of the same degree (term lists concatenated)."""
    _same_domain(P, Q)
    if P.degree != Q.degree:
        raise ValueError("degrees differ")
    if P.degree == 0:
        return PowerSumRep.constant_poly(P.constant + Q.constant, P.space, P.algebra)
    return PowerSumRep(P.degree, np.concatenate([P.weights, Q.weights]),
                       np.concatenate([P.matrices, Q.matrices]), P.space, P.algebra)


@dataclass(frozen=True, eq=False)
class PolynomialSum:
    """``P_0 + P_1 + ... + P_n`` with at most one power sum per degree."""

    parts: tuple[PowerSumRep, ...]

    def __post_init__(self):
        parts = tuple(sorted(self.parts, key=lambda p: p.degree))
        degrees = [p.degree for p in parts]
        if len(set(degrees)) != len(degrees):
            raise ValueError("at most one part per degree")
        if not parts:
            raise ValueError("empty polynomial sum")
        for p in parts[1:]:
            _same_domain(parts[0], p)
        object.__setattr__(self, "parts", parts)

    @classmethod
    def of(cls, *parts: PowerSumRep) -> PolynomialSum:
        """Merge parts, concatenating terms that share a degree."""
        by_deg: dict[int, PowerSumRep] = {}
        for p in parts:
            by_deg[p.degree] = concat_terms(by_deg[p.degree], p) if p.degree in by_deg else p
        return cls(tuple(by_deg.values()))

    @property
    def space(self):
        return self.parts[0].space

    @property
    def algebra(self):
        return self.parts[0].algebra

    @property
    def degree(self) -> int:
        return self.parts[-1].degree

    def part(self, degree: int) -> PowerSumRep | None:
        for p in self.parts:
            if p.degree == degree:
                return p
        return None

    def evaluate(self, X) -> np.ndarray:
        out = self.parts[0].evaluate(X)
        for p in self.parts[1:]:
            out = out + p.evaluate(X)
        return out

    def __call__(self, x):
        return self.evaluate(x)


def as_polynomial_sum(P) -> PolynomialSum:
    return P if isinstance(P, PolynomialSum) else PolynomialSum((P,))


# ---------------------------------------------------------------------------
# symmetric forms
# ---------------------------------------------------------------------------

def multisets(dim: int, n: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations_with_replacement(range(dim), n))


def multinomial(index: Sequence[int]) -> int:
    """Number of distinct orderings of the multiset ``index``."""
    out = math.factorial(len(index))
    for c in Counter(index).values():
        out //= math.factorial(c)
    return out


@dataclass(frozen=True, eq=False)
class SymmetricForm:
    """Symmetric ``n``-linear map ``T : E^n -> A`` keyed by index multisets.

    ``coeffs[(i_1 <= ... <= i_n)] = T(e_{i_1}, ..., e_{i_n})``; missing keys are
    zero.
    """

    degree: int
    coeffs: dict
    space: FiniteSpace
    algebra: FiniteBanachAlgebra

    @cached_property
    def dense(self) -> np.ndarray:
        d, n = self.space.dim, self.degree
        t = np.zeros((d,) * n + (self.algebra.dim,), dtype=complex)
        for key, val in self.coeffs.items():
            for perm in set(itertools.permutations(key)):
                t[perm] = val
        return t

    def evaluate(self, *args) -> np.ndarray:
        """``T(x_1, ..., x_n)``; each argument is a point or an ``(N, d)`` batch."""
        if len(args) != self.degree:
            raise ValueError(f"form of degree {self.degree} got {len(args)} arguments")
        xs = [np.asarray(a, dtype=complex) for a in args]
        for x in xs:
            if x.shape[-1] != self.space.dim:
                raise DimensionMismatchError("argument dimension does not match space")
        if self.degree == 0:
            return self.dense.copy()
        batch = any(x.ndim == 2 for x in xs)
        if batch:
            N = max(x.shape[0] for x in xs if x.ndim == 2)
            xs = [np.broadcast_to(x, (N, self.space.dim)) for x in xs]
            res = np.einsum("i...,ni->n...", self.dense, xs[0])
            for x in xs[1:]:
                res = np.einsum("ni...,ni->n...", res, x)
            return res
        res = self.dense
        for x in xs:
            res = np.einsum("i...,i->...", res, x)
        return res

    def diagonal(self, X) -> np.ndarray:
        return self.evaluate(*([X] * self.degree))

    def fix_last(self, vectors: Sequence[np.ndarray]) -> SymmetricForm:
        """The degree ``n - len(vectors)`` form ``(x_1..x_k) -> T(x_1..x_k, v_1..v_m)``."""
        k = self.degree - len(vectors)
        if k < 0:
            raise ValueError("too many fixed arguments")
        t = self.dense
        for v in reversed(vectors):
            t = np.einsum("...ia,i->...a", t, np.asarray(v, dtype=complex))
        coeffs = {key: t[key].copy() for key in multisets(self.space.dim, k)}
        return SymmetricForm(k, coeffs, self.space, self.algebra)


def eval_power_sum(P: PowerSumRep, x) -> np.ndarray:
    return P.evaluate(x)


def eval_form(T: SymmetricForm, *args) -> np.ndarray:
    return T.evaluate(*args)


def polarize(P: PowerSumRep) -> SymmetricForm:
    """Symmetric form of ``P`` via the signed-sum polarization formula.

    ``T(x_1..x_n) = 1/(2^n n!) sum_{eps in {+-1}^n} eps_1...eps_n P(sum eps_j x_j)``,
    applied to basis vectors for every index multiset.
    """
    n = P.degree
    if n == 0:
        raise NoPolarizationError("constant polynomials have no polarization")
    d = P.space.dim
    eye = np.eye(d, dtype=complex)
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    sign_prod = np.prod(signs, axis=1)
    keys = multisets(d, n)
    # all arguments sum_j eps_j e_{i_j} for every key in one batch
    pts = np.einsum("se,kei->ksi", signs, eye[np.array(keys)])
    vals = P.evaluate(pts.reshape(-1, d)).reshape(len(keys), len(signs), -1)
    coeff = np.einsum("s,ksa->ka", sign_prod, vals) / (2 ** n * math.factorial(n))
    return SymmetricForm(n, {k: coeff[i] for i, k in enumerate(keys)}, P.space, P.algebra)


def form_from_power_sum(P: PowerSumRep) -> SymmetricForm:
    """Symmetric form by direct expansion ``sum_i w_i T_i x_1 ... T_i x_n``.

    Independent of :func:`polarize`; used as its cross-check.
    """
    n, d = P.degree, P.space.dim
    A = P.algebra
    coeffs = {}
    for key in multisets(d, n):
        acc = np.zeros(A.dim, dtype=complex)
        for w, M in zip(P.weights, P.matrices):
            prod = A.identity.copy()
            for i in key:
                prod = A.mul(prod, M[:, i])
            acc += w * prod
        coeffs[key] = acc
    return SymmetricForm(n, coeffs, P.space, P.algebra)


def leibniz_expand(T: SymmetricForm, x, y) -> list[tuple[int, np.ndarray]]:
    """Terms ``(C(n, k), T(x^k, y^(n-k)))`` for ``k = 0..n``; they sum to ``T((x+y)^n)``."""
    n = T.degree
    return [(math.comb(n, k), T.evaluate(*([x] * k + [y] * (n - k)))) for k in range(n + 1)]


# ---------------------------------------------------------------------------
# products, constants, characters
# ---------------------------------------------------------------------------

def product_power_sums(P: PowerSumRep, Q: PowerSumRep) -> PowerSumRep:
    """Power-sum representation of the pointwise product ``PQ``.

    For terms ``S`` (degree m) and ``T`` (degree n) the identity
    ``a^m b^n = 1/(2^N N!) sum_eps eps_1..eps_N ((sum_{l<=m} eps_l) a + (sum_{l>m} eps_l) b)^N``
    with ``N = m + n`` emits ``2^N`` terms per pair, without merging.
    Degree-0 factors are delegated to :func:`multiply_by_constant`.
    """
    _same_domain(P, Q)
    m, n = P.degree, Q.degree
    if m == 0 and n == 0:
        return PowerSumRep.constant_poly(P.algebra.mul(P.constant, Q.constant), P.space, P.algebra)
    if n == 0:
        return multiply_by_constant(P, Q.constant)
    if m == 0:
        return multiply_by_constant(Q, P.constant)
    N = m + n
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=N)))
    coef_s = signs[:, :m].sum(axis=1)
    coef_t = signs[:, m:].sum(axis=1)
    eps = np.prod(signs, axis=1) / (2 ** N * math.factorial(N))
    weights, mats = [], []
    for wi, S in zip(P.weights, P.matrices):
        for wj, T in zip(Q.weights, Q.matrices):
            weights.append(wi * wj * eps)
            mats.append(coef_s[:, None, None] * S + coef_t[:, None, None] * T)
    if not weights:
        return PowerSumRep(N, [], [], P.space, P.algebra)
    return PowerSumRep(N, np.concatenate(weights), np.concatenate(mats), P.space, P.algebra)


def root_of_unity_decomposition(A: FiniteBanachAlgebra, b, m: int) -> list[np.ndarray]:
    """``b_1..b_m`` with ``b = b_1^m + ... + b_m^m`` (requires ``m >= 2``).

    ``b_k = exp(2 pi i k / m^2) / (m^2)^(1/m) * (b + exp(2 pi i k / m) 1)``.
    """
    if m < 2:
        raise ValueError("the roots-of-unity decomposition needs m >= 2")
    b = A.check_element(b)
    scale = (m * m) ** (1.0 / m)
    out = []
    for k in range(1, m + 1):
        pref = np.exp(2j * np.pi * k / (m * m)) / scale
        out.append(pref * (b + np.exp(2j * np.pi * k / m) * A.identity))
    return out


def multiply_by_constant(P: PowerSumRep, b) -> PowerSumRep:
    """``x -> P(x) b`` as a power sum of the same degree.

    Degree 1 multiplies each operator by ``b``; degree ``m >= 2`` uses
    ``T_{ik}(x) = T_i(x) b_k`` from :func:`root_of_unity_decomposition`,
    ordered by ``k`` then ``i``.
    """
    A = P.algebra
    b = A.check_element(b)
    m = P.degree
    if m == 0:
        return PowerSumRep.constant_poly(A.mul(P.constant, b), P.space, A)
    if m == 1:
        Mb = A.mult_matrix(b)
        return PowerSumRep(1, P.weights, np.einsum("ab,rbe->rae", Mb, P.matrices), P.space, A)
    weights, mats = [], []
    for bk in root_of_unity_decomposition(A, b, m):
        Mb = A.mult_matrix(bk)
        weights.append(P.weights)
        mats.append(np.einsum("ab,rbe->rae", Mb, P.matrices))
    return PowerSumRep(m, np.concatenate(weights), np.concatenate(mats), P.space, A)


def compose_character(phi, P: PowerSumRep) -> PowerSumRep:
    """Scalar power sum ``phi o P = sum_i w_i (phi o T_i)(x)^n``."""
    ch = require_character(P.algebra, phi)
    C = scalar_algebra()
    if P.degree == 0:
        return PowerSumRep.constant_poly([ch(P.constant)], P.space, C)
    rows = np.einsum("a,rae->re", ch.functional, P.matrices)
    return PowerSumRep(P.degree, P.weights, rows[:, None, :], P.space, C)


def absorb_weights(P: PowerSumRep) -> PowerSumRep:
    """Rewrite ``w T^n`` as ``(w^(1/n) T)^n`` (principal root); zero weights dropped."""
    if P.degree == 0:
        raise ValueError("absorb_weights needs degree >= 1")
    keep = P.weights != 0
    roots = np.power(P.weights[keep].astype(complex), 1.0 / P.degree)
    return PowerSumRep(P.degree, np.ones(int(keep.sum())), roots[:, None, None] * P.matrices[keep],
                       P.space, P.algebra)


def coalesce_terms(P: PowerSumRep, tol: float = 1e-12) -> PowerSumRep:
    """Merge terms whose operators are proportional (``T' = c T`` adds ``w' c^n``)."""
    if P.degree == 0 or P.n_terms == 0:
        return P
    reps: list[np.ndarray] = []
    weights: list[complex] = []
    for w, M in zip(P.weights, P.matrices):
        flat = M.reshape(-1)
        scale = np.max(np.abs(flat))
        if scale == 0:
            continue
        for i, R in enumerate(reps):
            rf = R.reshape(-1)
            k = int(np.argmax(np.abs(rf)))
            c = flat[k] / rf[k]
            if np.max(np.abs(flat - c * rf)) <= tol * scale:
                weights[i] += w * c ** P.degree
                break
        else:
            reps.append(M)
            weights.append(complex(w))
    keep = [i for i, w in enumerate(weights) if w != 0]
    if not keep:
        return PowerSumRep(P.degree, [], [], P.space, P.algebra)
    return PowerSumRep(P.degree, np.array(weights)[keep], np.stack(reps)[keep], P.space, P.algebra)


def product_polynomials(P, Q) -> PolynomialSum:
    """Product of (possibly mixed-degree) polynomials, part by part."""
    P, Q = as_polynomial_sum(P), as_polynomial_sum(Q)
    return PolynomialSum.of(*(product_power_sums(p, q) for p in P.parts for q in Q.parts))


def compose_character_sum(phi, P) -> PolynomialSum:
    return PolynomialSum(tuple(compose_character(phi, p) for p in as_polynomial_sum(P).parts))


def linear_combination(polys: Iterable[tuple[complex, PowerSumRep | PolynomialSum]]) -> PolynomialSum:
    parts = []
    for c, P in polys:
        parts.extend(p.scaled(c) for p in as_polynomial_sum(P).parts)
    return PolynomialSum.of(*parts)
