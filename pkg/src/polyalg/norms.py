"""Norms of polynomials, operators and tensors.

Exact quantities (uniform norms on a finite point cloud, closed-form
operator norms) are computed directly.  Everything that needs a supremum
over a unit ball is a seeded search from :mod:`polyalg.search` and is
reported as a :class:`NormEstimate` whose value is attained by its witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import (
    FiniteBanachAlgebra,
    FiniteSpace,
    dual_ball_points,
    dual_param_count,
    norming_functional,
    norming_vector,
    vector_norm,
)
from .errors import DimensionMismatchError
from .polynomials import (
    LinearOperator,
    PolynomialSum,
    PowerSumRep,
    SymmetricForm,
    as_polynomial_sum,
    polarize,
)
from .search import (
    DEFAULT_BUDGET,
    NormEstimate,
    SearchBudget,
    complex_to_real,
    maximize,
    real_to_complex,
)

GROWTH_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class CompactSet:
    """Finite point cloud ``K`` in ``space``; ``radius`` is the largest point norm."""

    points: np.ndarray
    space: FiniteSpace

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=complex))
        if pts.shape[0] == 0:
            raise ValueError("compact set must be nonempty")
        if pts.shape[1] != self.space.dim:
            raise DimensionMismatchError("points do not match the space dimension")
        object.__setattr__(self, "points", pts)

    @property
    def radius(self) -> float:
        return float(np.max(self.space.norm_of(self.points)))

    def __len__(self):
        return self.points.shape[0]

    def scaled(self, c: float) -> CompactSet:
        return CompactSet(c * self.points, self.space)


def _values_on(f, X) -> np.ndarray:
    if hasattr(f, "evaluate"):
        return f.evaluate(X)
    return np.asarray(f(X))


def uniform_norm_on_K(f, K: CompactSet, algebra: FiniteBanachAlgebra | None = None) -> float:
    """``max_{x in K} ||f(x)||``; ``f`` is a polynomial/tensor or a batch callable."""
    vals = _values_on(f, K.points)
    A = algebra if algebra is not None else getattr(f, "algebra", None)
    if A is None or vals.ndim == 1:
        return float(np.max(np.abs(vals)))
    return float(np.max(A.norm_of(vals)))


# ---------------------------------------------------------------------------
# sphere search helpers
# ---------------------------------------------------------------------------

def sphere_param_count(space: FiniteSpace) -> int:
    return space.dim if space.norm.kind == "sup" else 2 * space.dim


def sphere_points(space: FiniteSpace, params: np.ndarray) -> np.ndarray:
    """Unit-sphere points from search parameters.

    Sup-norm spaces use the torus ``x_k = exp(i pi t_k)``: norms of
    holomorphic maps are plurisubharmonic, so their maximum over the polydisc
    is attained there, and the ridge left by radial projection disappears.
    Other norms radially project ``2d`` real parameters.
    """
    params = np.atleast_2d(params)
    if space.norm.kind == "sup":
        return np.exp(1j * np.pi * params)
    z = real_to_complex(params)
    n = space.norm_of(z)
    n = np.where(n > 0, n, 1.0)
    return z / n[:, None]


def sphere_params(space: FiniteSpace, w) -> np.ndarray:
    """Parameters whose sphere point is (or, for sup norms, dominates) ``w``."""
    w = np.asarray(w, dtype=complex)
    if space.norm.kind == "sup":
        return np.angle(w) / np.pi
    return complex_to_real(w)


def _basis_starts(space: FiniteSpace) -> list[np.ndarray]:
    if space.norm.kind == "sup":
        return [np.zeros(space.dim)]
    return [complex_to_real(e) for e in np.eye(space.dim, dtype=complex)]


def _maximize_on_sphere(fn: Callable[[np.ndarray], np.ndarray], space: FiniteSpace,
                        budget: SearchBudget, starts=(), stream: int = 0):
    def objective(params):
        return fn(sphere_points(space, params))

    val, x = maximize(objective, sphere_param_count(space), budget,
                      starts=[*_basis_starts(space), *starts], stream=stream)
    w = sphere_points(space, x)[0]
    return float(fn(w[None, :])[0]), w


def sup_norm_unit_ball(P, budget: SearchBudget = DEFAULT_BUDGET) -> NormEstimate:
    """Lower bound for ``sup_{||x|| <= 1} ||P(x)||``.

    For a :class:`SymmetricForm` the supremum runs over tuples of unit
    vectors (the multilinear operator norm), see :func:`multilinear_norm`.
    Homogeneity places the supremum on the sphere, so the witness is a
    unit vector.
    """
    if isinstance(P, SymmetricForm):
        return multilinear_norm(P, budget)
    if isinstance(P, PowerSumRep) and P.degree == 0:
        w = np.zeros(P.space.dim, dtype=complex)
        w[0] = 1.0 / float(P.space.norm_of(np.eye(P.space.dim)[0]))
        return NormEstimate(float(P.algebra.norm_of(P.constant)), w, budget, exact=True)
    A = P.algebra

    def fn(X):
        return A.norm_of(P.evaluate(X))

    val, w = _maximize_on_sphere(fn, P.space, budget, stream=21)
    return NormEstimate(val, w, budget)


def multilinear_norm(T: SymmetricForm, budget: SearchBudget = DEFAULT_BUDGET,
                     starts=()) -> NormEstimate:
    """Lower bound for ``sup ||T(x_1..x_n)||`` over unit vectors ``x_j``.

    ``starts`` are extra initial points, each a sequence of ``n`` vectors.
    """
    n, space, A = T.degree, T.space, T.algebra
    if n == 0:
        return NormEstimate(float(A.norm_of(T.dense)), [], budget, exact=True)

    k = sphere_param_count(space)

    def points(params):
        params = np.atleast_2d(params)
        return [sphere_points(space, params[:, k * j:k * (j + 1)]) for j in range(n)]

    def objective(params):
        return A.norm_of(T.evaluate(*points(params)))

    init = [np.concatenate([b] * n) for b in _basis_starts(space)]
    init += [np.concatenate([sphere_params(space, v) for v in s]) for s in starts]
    _, x = maximize(objective, k * n, budget, starts=init, stream=22)
    xs = [p[0] for p in points(x)]
    val = float(A.norm_of(T.evaluate(*xs)))
    return NormEstimate(val, xs, budget)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def _closed_form_operator_norm(op: LinearOperator):
    M, E, A = op.matrix, op.space.norm, op.algebra.norm
    if E.kind == "lourenco" or A.kind == "lourenco":
        return None
    if op.algebra.dim == 1:
        return norming_vector(E, M[0])
    if E.kind == "p" and E.p == 1:
        k = int(np.argmax(vector_norm(A, M.T)))
        w = np.zeros(op.space.dim, dtype=complex)
        w[k] = 1.0
        return w
    if A.kind == "sup":
        rows = [norming_vector(E, r) for r in M]
        vals = [abs(r @ w) for r, w in zip(M, rows)]
        return rows[int(np.argmax(vals))]
    if E.kind == "p" and E.p == 2 and A.kind == "p" and A.p == 2:
        _, _, vh = np.linalg.svd(M)
        return vh[0].conj()
    return None


def operator_norm(op: LinearOperator, budget: SearchBudget = DEFAULT_BUDGET) -> NormEstimate:
    """``sup_{||x|| <= 1} ||T x||_A``.

    Closed form when the source is l1, the target is sup or C, or both are
    l2; otherwise a sphere search seeded with the top singular vector.
    """
    w = _closed_form_operator_norm(op)
    if w is not None:
        return NormEstimate(float(op.algebra.norm_of(op(w))), w, budget, exact=True)

    def fn(X):
        return op.algebra.norm_of(X @ op.matrix.T)

    _, _, vh = np.linalg.svd(op.matrix)
    val, w = _maximize_on_sphere(fn, op.space, budget, starts=[sphere_params(op.space, vh[0].conj())], stream=23)
    return NormEstimate(val, w, budget)


def nuclear_norm_upper(P: PowerSumRep, budget: SearchBudget = DEFAULT_BUDGET) -> float:
    """``sum_i |w_i| ||T_i||^n`` for the given representation.

    An upper bound for the infimum over all representations whenever the
    operator norms are exact (closed-form cases); otherwise the operator
    norms are search estimates.
    """
    if isinstance(P, PolynomialSum):
        return sum(nuclear_norm_upper(p, budget) for p in P.parts)
    if P.degree == 0:
        return float(P.algebra.norm_of(P.constant))
    total = 0.0
    for w, op in P.terms:
        total += abs(w) * operator_norm(op, budget).value ** P.degree
    return total


@dataclass(frozen=True)
class GrowthReport:
    lhs: float
    rhs: float
    satisfied: bool

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "satisfied": self.satisfied}


def check_growth_bound(P: PowerSumRep, K: CompactSet,
                       budget: SearchBudget = DEFAULT_BUDGET) -> GrowthReport:
    """``||P||_K <= M^n * (representation norm)`` with ``M = K.radius``."""
    lhs = uniform_norm_on_K(P, K)
    rhs = K.radius ** P.degree * nuclear_norm_upper(P, budget)
    return GrowthReport(lhs, rhs, lhs <= rhs + GROWTH_SLACK)


@dataclass(frozen=True)
class Sandwich:
    poly_norm: float
    form_norm: float
    nuclear_upper: float
    constant: float

    @property
    def lower_ok(self) -> bool:
        return self.poly_norm <= self.form_norm * (1 + 1e-12)

    def upper_ok(self, tol: float) -> bool:
        return self.form_norm <= self.constant * self.poly_norm + tol

    def nuclear_ok(self, tol: float = 1e-9) -> bool:
        return self.poly_norm <= self.nuclear_upper + tol


def polarization_sandwich(P: PowerSumRep, budget: SearchBudget = DEFAULT_BUDGET) -> Sandwich:
    """Estimates of ``||P||``, ``||T||`` (T = polarization of P) and the representation bound.

    The form search is warm-started at ``(w, ..., w)`` for the polynomial's
    witness ``w``, since ``||T|| >= ||P||`` is attained on the diagonal.
    """
    n = P.degree
    pe = sup_norm_unit_ball(P, budget)
    T = polarize(P)
    te = multilinear_norm(T, budget, starts=[[pe.witness] * n])
    return Sandwich(pe.value, te.value, nuclear_norm_upper(P, budget), n ** n / math.factorial(n))


# ---------------------------------------------------------------------------
# injective tensor norm
# ---------------------------------------------------------------------------

def injective_tensor_norm(t, K: CompactSet, budget: SearchBudget = DEFAULT_BUDGET) -> NormEstimate:
    """``sup_{phi in A*_1} sup_{x in K} |sum_i f_i(x) phi(a_i)|``.

    The inner supremum over the finite ``K`` is exact; the outer one is a
    search over dual-ball functionals, seeded with the Hahn-Banach
    functional of ``t(x)`` at every ``x in K``.  Witness: ``(phi, index)``.
    """
    A = t.algebra
    F = t.scalar_values(K.points)          # (N, terms)
    V = F @ t.elements                     # (N, dim A): pointwise image
    spec = A.norm

    def objective(params):
        phis = dual_ball_points(spec, params)
        return np.max(np.abs(phis @ V.T), axis=1)

    _, x = maximize(objective, dual_param_count(spec, A.dim), budget, stream=31)
    best_phi = dual_ball_points(spec, x)[0]
    best_val = float(np.max(np.abs(V @ best_phi)))
    for v in V:
        phi = norming_functional(spec, v)
        val = float(np.max(np.abs(V @ phi)))
        if val > best_val:
            best_phi, best_val = phi, val
    idx = int(np.argmax(np.abs(V @ best_phi)))
    return NormEstimate(best_val, (best_phi, idx), budget)
