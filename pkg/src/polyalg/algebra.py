"""Finite-dimensional commutative unital Banach algebras.

An algebra is stored as its structure tensor ``c`` with
``e_i e_j = sum_k c[i, j, k] e_k``, an identity vector and a :class:`NormSpec`.
Algebra elements are plain complex numpy vectors; batches carry the
coefficient axis last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from .errors import (
    DimensionMismatchError,
    InvalidAlgebraError,
    InvalidCharacterError,
    InvalidDecompositionError,
    InvalidNormError,
    UnsupportedAlgebraError,
)
from .search import DEFAULT_BUDGET, NormEstimate, SearchBudget, maximize, real_to_complex

IDENTITY_TOL = 1e-12
CHARACTER_TOL = 1e-10


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NormSpec:
    """Norm on ``C^d``: ``p`` (1 <= p < inf), ``sup``, or ``lourenco``.

    The lourenco norm is ``|psi(a)| + ||a - psi(a) e||_base`` where ``psi`` is
    rescaled so that ``psi(e) = 1``.
    """

    kind: str
    p: float = 2.0
    psi: np.ndarray | None = None
    e: np.ndarray | None = None
    base: NormSpec | None = None

    def __post_init__(self):
        if self.kind == "p":
            if not (self.p >= 1):
                raise InvalidNormError(f"p-norm exponent must be >= 1, got {self.p}")
            if math.isinf(self.p):
                object.__setattr__(self, "kind", "sup")
        elif self.kind == "lourenco":
            if self.psi is None or self.e is None or self.base is None:
                raise InvalidNormError("lourenco norm needs psi, e and a base norm")
            psi = np.asarray(self.psi, dtype=complex)
            e = np.asarray(self.e, dtype=complex)
            if psi.shape != e.shape or psi.ndim != 1:
                raise DimensionMismatchError("psi and e must be vectors of equal length")
            s = psi @ e
            if abs(s) < 1e-14:
                raise InvalidDecompositionError("psi(e) = 0: no splitting ker(psi) + C e")
            if abs(vector_norm(self.base, e) - 1.0) > 1e-12:
                raise InvalidNormError("lourenco unit vector e must have base norm 1")
            # already-normalized psi is kept bit-for-bit so serialization round-trips
            object.__setattr__(self, "psi", psi if abs(s - 1) <= 1e-14 else psi / s)
            object.__setattr__(self, "e", e)
        elif self.kind != "sup":
            raise InvalidNormError(f"unknown norm kind {self.kind!r}")

    @classmethod
    def pnorm(cls, p: float) -> NormSpec:
        return cls("p", p=float(p))

    @classmethod
    def sup(cls) -> NormSpec:
        return cls("sup")

    @classmethod
    def lourenco(cls, psi, e, base: NormSpec) -> NormSpec:
        return cls("lourenco", psi=psi, e=e, base=base)

    def dual(self) -> NormSpec:
        """Dual norm for the bilinear pairing ``phi(a) = sum phi_k a_k``."""
        if self.kind == "sup":
            return NormSpec.pnorm(1)
        if self.kind == "p":
            if self.p == 1:
                return NormSpec.sup()
            return NormSpec.pnorm(self.p / (self.p - 1))
        raise InvalidNormError("no closed-form dual for lourenco norms")

    def describe(self) -> str:
        if self.kind == "p":
            return f"l{self.p:g}"
        if self.kind == "sup":
            return "sup"
        return f"lourenco[{self.base.describe()}]"


def vector_norm(spec: NormSpec, x) -> np.ndarray | float:
    """Norm over the last axis."""
    x = np.asarray(x, dtype=complex)
    if spec.kind == "sup":
        return np.max(np.abs(x), axis=-1)
    if spec.kind == "p":
        ax = np.abs(x)
        if spec.p == 1:
            return np.sum(ax, axis=-1)
        if spec.p == 2:
            return np.sqrt(np.sum(ax * ax, axis=-1))
        return np.sum(ax ** spec.p, axis=-1) ** (1.0 / spec.p)
    t = x @ spec.psi
    rest = x - t[..., None] * spec.e
    return np.abs(t) + vector_norm(spec.base, rest)


def _restricted_dual(base: NormSpec, phi: np.ndarray, psi: np.ndarray, e: np.ndarray) -> float:
    # norm of phi restricted to ker(psi) = min_c ||phi - c psi||_base*
    dual = base.dual()

    def f(v):
        return float(vector_norm(dual, phi - (v[0] + 1j * v[1]) * psi))

    c0 = phi @ e
    res = minimize(f, [c0.real, c0.imag], method="Nelder-Mead",
                   options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 4000})
    return min(float(res.fun), f([c0.real, c0.imag]))


def dual_norm(spec: NormSpec, phi) -> float:
    """Operator norm of the functional ``phi`` with respect to ``spec``."""
    phi = np.asarray(phi, dtype=complex)
    if spec.kind in ("p", "sup"):
        return float(vector_norm(spec.dual(), phi))
    return max(abs(phi @ spec.e), _restricted_dual(spec.base, phi, spec.psi, spec.e))


def norming_functional(spec: NormSpec, a) -> np.ndarray:
    """Hahn-Banach functional: dual norm <= 1 and ``phi(a) = ||a||``."""
    a = np.asarray(a, dtype=complex)
    d = a.shape[-1]
    if spec.kind == "sup":
        k = int(np.argmax(np.abs(a)))
        phi = np.zeros(d, dtype=complex)
        phi[k] = _phase_conj(a[k])
        return phi
    if spec.kind == "p":
        if spec.p == 1:
            return np.array([_phase_conj(v) for v in a])
        nrm = float(vector_norm(spec, a))
        if nrm == 0.0:
            phi = np.zeros(d, dtype=complex)
            phi[0] = 1.0
            return phi
        mag = np.abs(a)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(mag > 0, mag ** (spec.p - 2), 0.0)
        return np.conj(a) * w / nrm ** (spec.p - 1)
    t = a @ spec.psi
    x = a - t * spec.e
    chi = norming_functional(spec.base, x)
    return _lourenco_functional(spec, _phase_conj(t), chi)


def norming_vector(spec: NormSpec, phi) -> np.ndarray:
    """Unit vector ``x`` (in ``spec``) with ``phi(x) = ||phi||_*``; p/sup only."""
    return norming_functional(spec.dual(), phi)


def _phase_conj(z: complex) -> complex:
    r = abs(z)
    return complex(np.conj(z) / r) if r > 0 else 1.0 + 0j


def _lourenco_functional(spec: NormSpec, c, chi):
    # phi = c psi + chi o (I - e psi); dual norm <= max(|c|, ||chi||_base*)
    chi = np.asarray(chi, dtype=complex)
    c = np.asarray(c, dtype=complex)
    chi_e = chi @ spec.e
    return c[..., None] * spec.psi + chi - chi_e[..., None] * spec.psi


def dual_ball_points(spec: NormSpec, params: np.ndarray) -> np.ndarray:
    """Map raw real parameters onto functionals of dual norm <= 1.

    p/sup: ``2d`` parameters, radially projected onto the dual sphere.
    lourenco: ``2 + 2d`` parameters, a phase ``c`` and a base-dual functional.
    """
    params = np.atleast_2d(params)
    if spec.kind in ("p", "sup"):
        z = real_to_complex(params)
        n = vector_norm(spec.dual(), z)
        n = np.where(n > 0, n, 1.0)
        return z / n[:, None]
    c = params[:, 0] + 1j * params[:, 1]
    c = c / np.where(np.abs(c) > 0, np.abs(c), 1.0)
    chi = dual_ball_points(spec.base, params[:, 2:])
    return _lourenco_functional(spec, c, chi)


def dual_param_count(spec: NormSpec, dim: int) -> int:
    return 2 * dim + (2 if spec.kind == "lourenco" else 0)


# ---------------------------------------------------------------------------
# spaces and algebras
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FiniteSpace:
    dim: int
    norm: NormSpec

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionMismatchError("space dimension must be >= 1")
        if self.norm.kind == "lourenco" and self.norm.psi.shape[0] != self.dim:
            raise DimensionMismatchError("lourenco norm dimension does not match space")

    def norm_of(self, x):
        return vector_norm(self.norm, x)


@dataclass(frozen=True, eq=False)
class FiniteBanachAlgebra:
    """Commutative unital algebra on ``C^dim`` given by its structure tensor.

    ``constant`` is the declared submultiplicativity constant ``C`` in
    ``||ab|| <= C ||a|| ||b||``.
    """

    structure: np.ndarray
    identity: np.ndarray
    norm: NormSpec
    constant: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.structure, dtype=complex)
        one = np.asarray(self.identity, dtype=complex)
        object.__setattr__(self, "structure", c)
        object.__setattr__(self, "identity", one)
        d = one.shape[0] if one.ndim == 1 else -1
        if d < 1 or c.shape != (d, d, d):
            raise DimensionMismatchError("structure tensor must be (d, d, d) with identity of length d")
        if self.norm.kind == "lourenco" and self.norm.psi.shape[0] != d:
            raise DimensionMismatchError("lourenco norm dimension does not match algebra")
        res = self.axiom_residuals()
        if res["commutativity"] != 0.0:
            raise InvalidAlgebraError("structure tensor is not commutative")
        if res["associativity"] > IDENTITY_TOL:
            raise InvalidAlgebraError(f"associativity residual {res['associativity']:.3e}")
        if res["identity"] > IDENTITY_TOL:
            raise InvalidAlgebraError(f"unit-law residual {res['identity']:.3e}")

    @property
    def dim(self) -> int:
        return self.identity.shape[0]

    def axiom_residuals(self) -> dict:
        """Commutativity (absolute) and associativity/unit-law residuals.

        The last two are relative to the size of the products involved, so
        rounding in large structure constants is not mistaken for a defect.
        """
        c = self.structure
        cmax = max(1.0, float(np.max(np.abs(c))))
        comm = float(np.max(np.abs(c - c.transpose(1, 0, 2))))
        left = np.einsum("ijm,mlk->ijlk", c, c)   # (e_i e_j) e_l
        right = np.einsum("jlm,imk->ijlk", c, c)  # e_i (e_j e_l)
        assoc = float(np.max(np.abs(left - right))) / (self.dim * cmax * cmax)
        unit = np.einsum("i,ijk->jk", self.identity, c)
        scale = self.dim * cmax * max(1.0, float(np.max(np.abs(self.identity))))
        ident = float(np.max(np.abs(unit - np.eye(self.dim)))) / scale
        return {"commutativity": comm, "associativity": assoc, "identity": ident}

    def mul(self, a, b) -> np.ndarray:
        return np.einsum("...i,...j,ijk->...k", np.asarray(a, dtype=complex),
                         np.asarray(b, dtype=complex), self.structure)

    def power(self, a, n: int) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        out = np.broadcast_to(self.identity, a.shape).copy()
        for _ in range(n):
            out = self.mul(out, a)
        return out

    def norm_of(self, a):
        return vector_norm(self.norm, a)

    def mult_matrix(self, b) -> np.ndarray:
        """Matrix of ``y -> b y``."""
        return np.einsum("i,ijk->kj", np.asarray(b, dtype=complex), self.structure)

    @cached_property
    def basis_mult_matrices(self) -> np.ndarray:
        return np.einsum("ijk->ikj", self.structure)

    def check_element(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        if a.shape[-1] != self.dim:
            raise DimensionMismatchError(f"element has length {a.shape[-1]}, algebra dim {self.dim}")
        return a


@dataclass(frozen=True, eq=False)
class Character:
    functional: np.ndarray

    def __call__(self, a):
        return np.asarray(a, dtype=complex) @ self.functional


@dataclass(frozen=True)
class CharacterCheck:
    valid: bool
    multiplicative_residual: float
    unit_residual: float

    def __bool__(self):
        return self.valid


def make_pointwise_algebra(dim: int, norm: NormSpec) -> FiniteBanachAlgebra:
    """``C^dim`` with coordinatewise product (p-norm or sup-norm)."""
    if dim < 1:
        raise DimensionMismatchError("algebra dimension must be >= 1")
    if norm.kind == "lourenco":
        raise InvalidNormError("use make_lourenco_algebra for lourenco norms")
    c = np.zeros((dim, dim, dim), dtype=complex)
    idx = np.arange(dim)
    c[idx, idx, idx] = 1.0
    return FiniteBanachAlgebra(c, np.ones(dim, dtype=complex), norm, constant=1.0)


def scalar_algebra() -> FiniteBanachAlgebra:
    return make_pointwise_algebra(1, NormSpec.sup())


def lourenco_product(psi, e, a, b):
    """``ab = psi(b) x + psi(a) y + psi(a) psi(b) e`` with ``a = x + psi(a) e``."""
    pa, pb = a @ psi, b @ psi
    x, y = a - pa * e, b - pb * e
    return pb * x + pa * y + pa * pb * e


def make_lourenco_algebra(space: FiniteSpace, psi, e, base: NormSpec | None = None) -> FiniteBanachAlgebra:
    """Turn ``space`` into a unital algebra with identity ``e``.

    ``psi`` is rescaled to ``psi(e) = 1`` so that ``a - psi(a) e`` lies in
    ``ker psi``.  The norm is ``|psi(a)| + ||a - psi(a) e||`` measured in
    ``base`` (default: the space norm).
    """
    psi = np.asarray(psi, dtype=complex)
    e = np.asarray(e, dtype=complex)
    if psi.shape != (space.dim,) or e.shape != (space.dim,):
        raise DimensionMismatchError("psi and e must have the space dimension")
    if abs(psi @ e) < 1e-14:
        raise InvalidDecompositionError("psi(e) = 0: no splitting ker(psi) + C e")
    norm = NormSpec.lourenco(psi, e, base if base is not None else space.norm)
    psi = norm.psi
    eye = np.eye(space.dim, dtype=complex)
    c = np.empty((space.dim,) * 3, dtype=complex)
    for i in range(space.dim):
        for j in range(space.dim):
            c[i, j] = lourenco_product(psi, e, eye[i], eye[j])
    # the formula is symmetric in (a, b); remove rounding asymmetry
    c = 0.5 * (c + c.transpose(1, 0, 2))
    return FiniteBanachAlgebra(c, e, norm, constant=1.0)


def alg_mul(A: FiniteBanachAlgebra, a, b) -> np.ndarray:
    return A.mul(A.check_element(a), A.check_element(b))


def alg_norm(A: FiniteBanachAlgebra, a) -> float:
    return float(A.norm_of(A.check_element(a)))


def measure_submultiplicativity(A: FiniteBanachAlgebra, rng: np.random.Generator,
                                samples: int = 1000) -> float:
    """Largest observed ``||ab|| / (||a|| ||b||)`` over random pairs."""
    z = rng.standard_normal((2, samples, A.dim)) + 1j * rng.standard_normal((2, samples, A.dim))
    a, b = z
    return float(np.max(A.norm_of(A.mul(a, b)) / (A.norm_of(a) * A.norm_of(b))))


def dual_norm_sup(A: FiniteBanachAlgebra, a, budget: SearchBudget = DEFAULT_BUDGET) -> NormEstimate:
    """Lower bound for ``sup |phi(a)|`` over the dual unit ball of ``A``.

    Seeded search over dual-ball functionals; the Hahn-Banach functional of
    ``a`` is always among the candidates, so the bound is attained whenever
    the norm has one in closed form (all supported kinds do).
    """
    a = A.check_element(a)
    spec = A.norm

    def objective(params):
        return np.abs(dual_ball_points(spec, params) @ a)

    val, x = maximize(objective, dual_param_count(spec, A.dim), budget, stream=11)
    best = dual_ball_points(spec, x)[0]
    hb = norming_functional(spec, a)
    if abs(hb @ a) > abs(best @ a):
        best = hb
    return NormEstimate(float(abs(best @ a)), best, budget)


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------

def validate_character(A: FiniteBanachAlgebra, phi, tol: float = CHARACTER_TOL) -> CharacterCheck:
    f = np.asarray(getattr(phi, "functional", phi), dtype=complex)
    if f.shape != (A.dim,):
        raise DimensionMismatchError("functional length does not match algebra")
    prod = np.einsum("ijk,k->ij", A.structure, f)
    mult = float(np.max(np.abs(prod - np.outer(f, f))))
    unit = float(abs(f @ A.identity - 1.0))
    return CharacterCheck(mult <= tol and unit <= tol, mult, unit)


def _null_space(M: np.ndarray, rtol: float) -> np.ndarray:
    u, s, vh = np.linalg.svd(M)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > rtol * scale))
    return vh[rank:].conj().T


def enumerate_characters(A: FiniteBanachAlgebra, tol: float = CHARACTER_TOL) -> list[Character]:
    """All characters of ``A``.

    Characters vanish on the radical, which for a commutative algebra over C
    is the kernel of the trace form ``(a, b) -> tr(L_{ab})``.  On the
    annihilator of the radical the multiplication operators act as a
    commuting diagonalizable family; its joint left eigenvectors, normalized
    to ``phi(1) = 1``, are the characters.
    """
    d = A.dim
    L = A.basis_mult_matrices  # L[i] is y -> e_i y
    gram = np.einsum("iab,jba->ij", L, L)
    radical = _null_space(gram, 1e-9)
    if radical.shape[1]:
        W = _null_space(radical.T, 1e-9).T  # rows: functionals killing the radical
    else:
        W = np.eye(d, dtype=complex)
    s = W.shape[0]
    if s == 0:
        raise UnsupportedAlgebraError("no functional survives the radical")
    Winv = np.linalg.pinv(W)
    B = np.einsum("ra,iab,bs->irs", W, L, Winv)  # W L_i = B_i W
    # fixed irrational weights keep the combination generic and reproducible
    weights = np.sqrt(np.arange(2, d + 2, dtype=float)) + 1j / np.arange(1, d + 1)
    M = np.einsum("i,irs->rs", weights, B)
    evals, left = np.linalg.eig(M.T)
    chars = []
    for k in range(s):
        phi = left[:, k] @ W
        denom = phi @ A.identity
        if abs(denom) < 1e-12:
            raise UnsupportedAlgebraError("eigenfunctional vanishes on the identity")
        phi = phi / denom
        if not validate_character(A, phi, tol):
            raise UnsupportedAlgebraError(
                "multiplication operators are not simultaneously diagonalizable modulo the radical")
        chars.append(Character(phi))
    for i in range(len(chars)):
        for j in range(i):
            if np.max(np.abs(chars[i].functional - chars[j].functional)) < 1e-8:
                raise UnsupportedAlgebraError("repeated character: family not resolved")
    chars.sort(key=lambda ch: tuple(np.round(-np.abs(ch.functional), 9)))
    return chars


def require_character(A: FiniteBanachAlgebra, phi) -> Character:
    ch = phi if isinstance(phi, Character) else Character(np.asarray(phi, dtype=complex))
    check = validate_character(A, ch)
    if not check:
        raise InvalidCharacterError(
            f"not a character (multiplicative residual {check.multiplicative_residual:.2e},"
            f" unit residual {check.unit_residual:.2e})")
    return ch
