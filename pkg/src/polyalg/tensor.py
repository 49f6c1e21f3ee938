"""Rewriting algebra-valued polynomials as finite sums ``sum f_i a_i``.

Given a finite-rank approximation ``x ~ sum_i psi_i(x) a_i`` of the identity on
``K``, a degree-``n`` polynomial with symmetric form ``T`` satisfies

    T(x^n) + sum_{k<n} g_k(x) = T((x - sum_i psi_i(x) a_i)^n),
    g_k(x) = C(n, k) T(x^k, (-sum_i psi_i(x) a_i)^(n-k)),

so ``P ~ -sum_k g_k`` up to ``||T|| eps^n``.  Expanding ``g_k`` over index
multisets ``beta`` gives scalar monomials ``prod psi_i^beta_i`` times the
degree-``k`` polynomial ``x -> T(x^k, a^beta)``, which is rewritten the same
way until only constants remain.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .algebra import FiniteBanachAlgebra, FiniteSpace, scalar_algebra
from .errors import DimensionMismatchError
from .norms import CompactSet, multilinear_norm, operator_norm
from .polynomials import (
    LinearOperator,
    PowerSumRep,
    SymmetricForm,
    as_polynomial_sum,
    multinomial,
    multisets,
    polarize,
)
from .search import SearchBudget

SAFETY_FACTOR = 1.05
TENSORIZE_BUDGET = SearchBudget(samples=1024, refine_steps=100, seed=0)


# ---------------------------------------------------------------------------
# scalar functions and tensor elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LinearMonomial:
    """``x -> prod_j psi_j(x)`` for the rows ``psi_j`` of ``functionals``."""

    functionals: np.ndarray  # (k, dim E)
    space: FiniteSpace

    @property
    def degree(self) -> int:
        return self.functionals.shape[0]

    def scalar(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=complex))
        out = np.ones(X.shape[0], dtype=complex)
        for psi in self.functionals:
            out = out * (X @ psi)
        return out

    def to_power_sum(self) -> PowerSumRep:
        """Nuclear power sum via ``y_1..y_k = 1/(2^k k!) sum_eps eps_1..eps_k (sum eps_j y_j)^k``."""
        k = self.degree
        if k == 0:
            return PowerSumRep.constant_poly([1.0], self.space, scalar_algebra())
        if k == 1:
            return PowerSumRep.nuclear(1, self.functionals, self.space)
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=k)))
        weights = np.prod(signs, axis=1) / (2 ** k * math.factorial(k))
        return PowerSumRep.nuclear(k, signs @ self.functionals, self.space, weights)


def scalar_values(f, X) -> np.ndarray:
    """Scalar function values at the rows of ``X``."""
    if hasattr(f, "scalar"):
        return f.scalar(X)
    if isinstance(f, PowerSumRep) or hasattr(f, "evaluate"):
        v = f.evaluate(X)
        return v[..., 0] if v.ndim == 2 else v
    return np.asarray(f(X), dtype=complex)


@dataclass(frozen=True, eq=False)
class TensorElement:
    """``x -> sum_i f_i(x) a_i`` with scalar ``f_i`` and algebra elements ``a_i``."""

    functions: tuple
    elements: np.ndarray  # (terms, dim A)
    algebra: FiniteBanachAlgebra

    def __post_init__(self):
        el = np.asarray(self.elements, dtype=complex).reshape(len(self.functions), self.algebra.dim)
        object.__setattr__(self, "elements", el)
        object.__setattr__(self, "functions", tuple(self.functions))

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple], algebra: FiniteBanachAlgebra) -> TensorElement:
        return cls(tuple(f for f, _ in pairs), np.array([a for _, a in pairs], dtype=complex), algebra)

    @property
    def pairs(self):
        return list(zip(self.functions, self.elements))

    def scalar_values(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=complex))
        if not self.functions:
            return np.zeros((X.shape[0], 0), dtype=complex)
        return np.stack([scalar_values(f, X) for f in self.functions], axis=1)

    def evaluate(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        single = X.ndim == 1
        out = self.scalar_values(X) @ self.elements
        return out[0] if single else out

    def __call__(self, x):
        return self.evaluate(x)


# ---------------------------------------------------------------------------
# identity approximation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IdentityApproximation:
    """``x ~ sum_i psi_i(x) a_i`` on ``K``; ``epsilon`` is the exact max residual on ``K``."""

    functionals: np.ndarray  # (m, d) rows psi_i
    vectors: np.ndarray      # (m, d) rows a_i
    K: CompactSet

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.functionals, dtype=complex))
        v = np.atleast_2d(np.asarray(self.vectors, dtype=complex))
        if f.shape != v.shape or f.shape[1] != self.K.space.dim:
            raise DimensionMismatchError("functionals and vectors must be (m, dim E)")
        object.__setattr__(self, "functionals", f)
        object.__setattr__(self, "vectors", v)

    @property
    def space(self) -> FiniteSpace:
        return self.K.space

    @property
    def rank(self) -> int:
        return self.functionals.shape[0]

    @property
    def operator(self) -> np.ndarray:
        return self.vectors.T @ self.functionals

    def approximate(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=complex) @ self.functionals.T) @ self.vectors

    def residuals(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=complex))
        return self.space.norm_of(X - self.approximate(X))

    @property
    def epsilon(self) -> float:
        return float(np.max(self.residuals(self.K.points)))

    def functional_sup(self, beta: Sequence[int]) -> float:
        """``max_{x in K} prod_i |psi_i(x)|^beta_i``."""
        vals = np.ones(len(self.K), dtype=float)
        for i in beta:
            vals = vals * np.abs(self.K.points @ self.functionals[i])
        return float(np.max(vals))


def _rank_residual(space, points, d, r):
    def f(v):
        U = (v[:d * r] + 1j * v[d * r:2 * d * r]).reshape(d, r)
        V = (v[2 * d * r:3 * d * r] + 1j * v[3 * d * r:]).reshape(r, d)
        R = points - (points @ V.T) @ U.T
        return float(np.max(space.norm_of(R)))
    return f


def finite_rank_identity_approx(E: FiniteSpace, K: CompactSet, rank: int | None = None,
                                seed: int = 0, restarts: int = 2,
                                polish: int = 5) -> IdentityApproximation:
    """Coordinate decomposition of the identity, optionally capped at ``rank``.

    Without a cap (or ``rank >= dim``) this is exact: ``psi_i`` the coordinate
    functionals, ``a_i`` the basis vectors.  With a cap, a rank-``r`` operator
    ``U V`` is fitted to minimize the max residual over ``K`` (Nelder-Mead
    from the principal subspace of ``K`` plus seeded restarts); ``epsilon``
    is the residual of the operator actually returned.
    """
    if K.space.dim != E.dim:
        raise DimensionMismatchError("K does not live in E")
    d = E.dim
    if rank is None or rank >= d:
        eye = np.eye(d, dtype=complex)
        return IdentityApproximation(eye, eye, K)
    r = int(rank)
    if r < 1:
        raise ValueError("rank cap must be >= 1")
    pts = K.points
    f = _rank_residual(E, pts, d, r)
    u, _, _ = np.linalg.svd(pts.T)
    Ur = u[:, :r]
    v0 = np.concatenate([Ur.real.ravel(), Ur.imag.ravel(), Ur.conj().T.real.ravel(), Ur.conj().T.imag.ravel()])
    rng = np.random.default_rng([seed, 41])
    inits = [v0] + [v0 + 0.5 * rng.standard_normal(v0.size) for _ in range(restarts)]
    opts = {"maxiter": 3000, "maxfev": 6000, "xatol": 1e-10, "fatol": 1e-12}
    best_v, best_f = v0, f(v0)
    for init in inits:
        res = minimize(f, init, method="Nelder-Mead", options=opts)
        if res.fun < best_f:
            best_v, best_f = res.x, float(res.fun)
    # restarting the simplex at the incumbent escapes premature collapse
    for _ in range(polish):
        res = minimize(f, best_v, method="Nelder-Mead", options=opts)
        if not res.fun < best_f * (1 - 1e-9):
            break
        best_v, best_f = res.x, float(res.fun)
    U = (best_v[:d * r] + 1j * best_v[d * r:2 * d * r]).reshape(d, r)
    V = (best_v[2 * d * r:3 * d * r] + 1j * best_v[3 * d * r:]).reshape(r, d)
    return IdentityApproximation(V, U.T, K)


# ---------------------------------------------------------------------------
# correction terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GTerm:
    """``g_k(x) = C(n, k) T(x^k, (-sum_i psi_i(x) a_i)^(n-k))``."""

    k: int
    form: SymmetricForm
    approx: IdentityApproximation

    @property
    def n(self) -> int:
        return self.form.degree

    def evaluate(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=complex))
        Y = -self.approx.approximate(X)
        return math.comb(self.n, self.k) * self.form.evaluate(*([X] * self.k + [Y] * (self.n - self.k)))

    def __call__(self, X):
        return self.evaluate(X)

    def components(self) -> list[tuple[tuple[int, ...], float, SymmetricForm]]:
        """``(beta, coefficient, T(., a^beta))`` for every multiset ``beta`` of size ``n - k``.

        ``coefficient = C(n, k) (-1)^(n-k) (n-k)! / beta!``.
        """
        j = self.n - self.k
        base = math.comb(self.n, self.k) * (-1) ** j
        out = []
        for beta in multisets(self.approx.rank, j):
            sub = self.form.fix_last([self.approx.vectors[i] for i in beta])
            out.append((beta, float(base * multinomial(beta)), sub))
        return out

    def expanded(self, X) -> np.ndarray:
        """Same values via the multi-index expansion."""
        X = np.atleast_2d(np.asarray(X, dtype=complex))
        psi = X @ self.approx.functionals.T  # (N, m)
        out = np.zeros((X.shape[0], self.form.algebra.dim), dtype=complex)
        for beta, coef, sub in self.components():
            mono = np.prod(psi[:, list(beta)], axis=1) if beta else np.ones(X.shape[0])
            vals = sub.diagonal(X) if sub.degree else np.broadcast_to(sub.dense, out.shape)
            out += coef * mono[:, None] * vals
        return out


def g_terms(T: SymmetricForm, approx: IdentityApproximation) -> list[GTerm]:
    if T.degree < 1:
        raise ValueError("g terms need degree >= 1")
    return [GTerm(k, T, approx) for k in range(T.degree)]


# ---------------------------------------------------------------------------
# tensorization
# ---------------------------------------------------------------------------

def _form_norm(T: SymmetricForm, budget: SearchBudget) -> float:
    if T.degree == 1:
        M = np.stack([T.coeffs.get((i,), np.zeros(T.algebra.dim)) for i in range(T.space.dim)], axis=1)
        return operator_norm(LinearOperator(M, T.space, T.algebra), budget).value
    return multilinear_norm(T, budget).value


def _tensorize_form(T: SymmetricForm, approx: IdentityApproximation, eps: float,
                    budget: SearchBudget) -> tuple[dict, float]:
    n = T.degree
    if n == 0:
        return {(): T.dense.copy()}, 0.0
    bound = SAFETY_FACTOR * _form_norm(T, budget) * eps ** n if eps > 0 else 0.0
    out: dict[tuple, np.ndarray] = {}
    for g in g_terms(T, approx):
        for beta, coef, sub in g.components():
            pieces, sub_bound = _tensorize_form(sub, approx, eps, budget)
            for gamma, val in pieces.items():
                key = tuple(sorted(beta + gamma))
                out[key] = out.get(key, 0.0) - coef * val
            if sub_bound > 0:
                bound += abs(coef) * approx.functional_sup(beta) * sub_bound
    return out, bound


@dataclass(frozen=True, eq=False)
class TensorizeResult:
    tensor: TensorElement
    error_bound: float
    keys: tuple

    def __iter__(self):
        return iter((self.tensor, self.error_bound))


def tensorize(P, K: CompactSet, approx: IdentityApproximation,
              budget: SearchBudget = TENSORIZE_BUDGET) -> TensorizeResult:
    """Rewrite ``P`` as ``sum_beta (prod_i psi_i^beta_i) a_beta`` on ``K``.

    Returns the tensor element and an error bound: per homogeneous part,
    ``1.05 * ||T||_est * eps^n`` plus the bounds of the recursive rewrites
    weighted by their scalar coefficients and ``max_K |prod psi^beta|``.  The
    bound is zero when the identity approximation is exact on ``K``.
    """
    P = as_polynomial_sum(P)
    if approx.K is not K and approx.space.dim != K.space.dim:
        raise DimensionMismatchError("approximation and K live in different spaces")
    eps = approx.epsilon
    acc: dict[tuple, np.ndarray] = {}
    bound = 0.0
    for part in P.parts:
        if part.degree == 0:
            pieces, b = {(): part.constant.copy()}, 0.0
        else:
            pieces, b = _tensorize_form(polarize(part), approx, eps, budget)
        for key, val in pieces.items():
            acc[key] = acc.get(key, 0.0) + val
        bound += b
    keys = tuple(sorted(acc, key=lambda k: (len(k), k)))
    funcs = [LinearMonomial(approx.functionals[list(k)].reshape(len(k), approx.space.dim), approx.space) for k in keys]
    elems = np.array([acc[k] for k in keys], dtype=complex).reshape(len(keys), P.algebra.dim)
    return TensorizeResult(TensorElement(tuple(funcs), elems, P.algebra), float(bound), keys)


def verify_tensorization(P, t: TensorElement, K: CompactSet) -> float:
    """``max_{x in K} ||P(x) - t(x)||``."""
    P = as_polynomial_sum(P)
    diff = P.evaluate(K.points) - t.evaluate(K.points)
    return float(np.max(P.algebra.norm_of(diff)))
