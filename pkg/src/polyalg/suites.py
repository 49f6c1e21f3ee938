"""Seeded property suites behind ``polyalg verify-suite``.

Each suite draws its instances from ``default_rng([seed, suite_id, i])`` so
instance ``i`` does not depend on how many instances run, and reports for
every property the per-instance residuals, their maximum and the tolerance
it is judged against.  Reports carry no timings or thread counts, so equal
seeds give byte-identical reports.
"""

from __future__ import annotations

import inspect
import math
import platform
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy

from .algebra import (
    FiniteSpace,
    NormSpec,
    enumerate_characters,
    make_pointwise_algebra,
    validate_character,
)
from .errors import ConfigError, NotCertifiedError
from .hulls import NO_VIOLATION, HullQuery, hull_membership, product_character
from .norms import (
    check_growth_bound,
    injective_tensor_norm,
    polarization_sandwich,
    uniform_norm_on_K,
)
from .polynomials import (
    PolynomialSum,
    PowerSumRep,
    form_from_power_sum,
    leibniz_expand,
    multiply_by_constant,
    polarize,
    product_power_sums,
    root_of_unity_decomposition,
)
from .random_instances import (
    cgauss,
    circle,
    random_algebra,
    random_compact,
    random_norm,
    random_points,
    random_polynomial,
    random_power_sum,
    random_lourenco_algebra,
    random_space,
)
from .search import DEFAULT_BUDGET, SearchBudget
from .tensor import (
    LinearMonomial,
    TensorElement,
    finite_rank_identity_approx,
    tensorize,
    verify_tensorization,
)

TINY = 1e-300


@dataclass(frozen=True)
class PropertyResult:
    name: str
    residuals: tuple
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def instances(self) -> int:
        return len(self.residuals)

    @property
    def max_residual(self) -> float:
        return float(max(self.residuals, default=0.0))

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def to_dict(self) -> dict:
        return {"name": self.name, "instances": self.instances, "max_residual": self.max_residual,
                "tolerance": self.tolerance, "pass": self.passed,
                "residuals": [float(r) for r in self.residuals], **self.details}


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    seed: int
    properties: tuple

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties)

    def property(self, name: str) -> PropertyResult:
        for p in self.properties:
            if p.name == name:
                return p
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "pass": self.passed,
                "properties": [p.to_dict() for p in self.properties],
                "environment": environment_fingerprint()}


def environment_fingerprint() -> dict:
    return {"python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "machine": platform.machine()}


def _rng(seed: int, suite_id: int, i: int) -> np.random.Generator:
    return np.random.default_rng([seed, suite_id, i])


def term_magnitude(P: PowerSumRep, X) -> np.ndarray:
    """``sum_i |w_i| ||(T_i x)^n||`` at each row of ``X``: the scale relative residuals use."""
    X = np.atleast_2d(X)
    A = P.algebra
    if P.degree == 0:
        return np.full(X.shape[0], float(A.norm_of(P.constant)))
    Y = np.einsum("rae,ne->nra", P.matrices, X)
    return np.abs(P.weights) @ A.norm_of(A.power(Y, P.degree)).T


def _relative(err: np.ndarray, scale: np.ndarray) -> float:
    return float(np.max(err / np.maximum(scale, TINY)))


# ---------------------------------------------------------------------------
# polynomial identities
# ---------------------------------------------------------------------------

def suite_polarization(seed: int, instances: int = 200, points: int = 50) -> list[PropertyResult]:
    eval_res, form_res = [], []
    for i in range(instances):
        rng = _rng(seed, 1, i)
        n, dE, dA = (int(rng.integers(1, 5)), int(rng.integers(1, 5)), int(rng.integers(1, 4)))
        E, A = random_space(rng, dE), random_algebra(rng, dA)
        P = random_power_sum(rng, n, E, A)
        X = random_points(rng, points, E, radius=2.0)
        T = polarize(P)
        err = A.norm_of(T.diagonal(X) - P.evaluate(X))
        eval_res.append(_relative(err, term_magnitude(P, X)))
        direct = form_from_power_sum(P)
        col = A.norm_of(np.swapaxes(P.matrices, 1, 2))  # (terms, dim E)
        worst = 0.0
        for k, v in direct.coeffs.items():
            scale = float(np.abs(P.weights) @ np.prod(col[:, list(k)], axis=1))
            worst = max(worst, float(A.norm_of(T.coeffs[k] - v)) / max(scale, TINY))
        form_res.append(worst)
    return [PropertyResult("polarize-then-evaluate", tuple(eval_res), 1e-10),
            PropertyResult("polarize-matches-direct-form", tuple(form_res), 1e-10)]


def suite_products(seed: int, instances: int = 100, points: int = 100) -> list[PropertyResult]:
    res, count = [], []
    for i in range(instances):
        rng = _rng(seed, 2, i)
        m = int(rng.integers(1, 5))
        n = int(rng.integers(1, 6 - m))
        E, A = random_space(rng, int(rng.integers(1, 4))), random_algebra(rng, int(rng.integers(1, 4)))
        P, Q = random_power_sum(rng, m, E, A), random_power_sum(rng, n, E, A)
        PQ = product_power_sums(P, Q)
        X = random_points(rng, points, E, radius=2.0)
        err = A.norm_of(PQ.evaluate(X) - A.mul(P.evaluate(X), Q.evaluate(X)))
        res.append(_relative(err, term_magnitude(PQ, X)))
        count.append(float(PQ.n_terms != P.n_terms * Q.n_terms * 2 ** (m + n)))
    return [PropertyResult("product-pointwise", tuple(res), 1e-10),
            PropertyResult("product-term-count", tuple(count), 0.0)]


def suite_roots_of_unity(seed: int, instances: int = 50, points: int = 20) -> list[PropertyResult]:
    dec, const = [], []
    for m in range(2, 7):
        for i in range(instances):
            rng = _rng(seed, 3, 1000 * m + i)
            A = random_algebra(rng, int(rng.integers(1, 4)))
            b = 2.0 * cgauss(rng, A.dim)
            bk = root_of_unity_decomposition(A, b, m)
            powers = [A.power(x, m) for x in bk]
            scale = max(float(A.norm_of(b)), sum(float(A.norm_of(p)) for p in powers))
            dec.append(float(A.norm_of(sum(powers) - b)) / scale)
            E = random_space(rng, int(rng.integers(1, 4)))
            P = random_power_sum(rng, m, E, A)
            bP = multiply_by_constant(P, b)
            X = random_points(rng, points, E, radius=2.0)
            err = A.norm_of(bP.evaluate(X) - A.mul(P.evaluate(X), b))
            const.append(_relative(err, term_magnitude(bP, X)))
    return [PropertyResult("roots-of-unity-sum", tuple(dec), 1e-10),
            PropertyResult("multiply-by-constant", tuple(const), 1e-10)]


def suite_leibniz(seed: int, instances: int = 200) -> list[PropertyResult]:
    res, edge = [], []
    for i in range(instances):
        rng = _rng(seed, 4, i)
        n = int(rng.integers(1, 5))
        E, A = random_space(rng, int(rng.integers(1, 5))), random_algebra(rng, int(rng.integers(1, 4)))
        T = polarize(random_power_sum(rng, n, E, A))
        x, y = random_points(rng, 2, E, radius=2.0)
        terms = leibniz_expand(T, x, y)
        total = sum(c * v for c, v in terms)
        scale = sum(c * float(A.norm_of(v)) for c, v in terms)
        res.append(float(A.norm_of(total - T.diagonal(x + y))) / max(scale, TINY))
        zero = leibniz_expand(T, x, np.zeros_like(x))
        exact = all(np.all(v == 0) for _, v in zero[:-1]) and np.array_equal(zero[-1][1], T.diagonal(x))
        edge.append(0.0 if exact and zero[-1][0] == 1 else 1.0)
    return [PropertyResult("leibniz-sum", tuple(res), 1e-10),
            PropertyResult("leibniz-y-zero", tuple(edge), 0.0)]


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def suite_growth_bound(seed: int, instances: int = 200,
                       budget: SearchBudget = DEFAULT_BUDGET) -> list[PropertyResult]:
    res, slack = [], []
    for i in range(instances):
        rng = _rng(seed, 5, i)
        n = int(rng.integers(1, 5))
        E, A = random_space(rng, int(rng.integers(1, 4))), random_algebra(rng, int(rng.integers(1, 4)))
        P = random_power_sum(rng, n, E, A)
        K = random_compact(rng, int(rng.integers(10, 51)), E, radius=float(rng.uniform(0.5, 2.0)))
        rep = check_growth_bound(P, K, SearchBudget(budget.samples, budget.refine_steps, seed))
        res.append(max(0.0, rep.lhs - rep.rhs))
        slack.append(rep.lhs / rep.rhs if rep.rhs > 0 else 0.0)
    return [PropertyResult("growth-bound", tuple(res), 1e-9, {"max_lhs_over_rhs": max(slack, default=0.0)})]


def suite_norm_sandwich(seed: int, instances: int = 50,
                        budget: SearchBudget = DEFAULT_BUDGET) -> list[PropertyResult]:
    nuc, lower, upper = [], [], []
    ratio = {}
    b = SearchBudget(budget.samples, budget.refine_steps, seed)
    for n in (1, 2, 3):
        worst = 0.0
        for i in range(instances):
            rng = _rng(seed, 6, 1000 * n + i)
            E = FiniteSpace(int(rng.integers(1, 4)), random_norm(rng))
            A = random_algebra(rng, int(rng.integers(1, 4)))
            P = random_power_sum(rng, n, E, A)
            s = polarization_sandwich(P, b)
            nuc.append(max(0.0, s.poly_norm - s.nuclear_upper))
            lower.append(max(0.0, s.poly_norm - s.form_norm))
            upper.append(max(0.0, s.form_norm - s.constant * s.poly_norm))
            worst = max(worst, s.form_norm / s.poly_norm if s.poly_norm > 0 else 0.0)
        ratio[str(n)] = worst
    return [PropertyResult("norm-below-nuclear-upper", tuple(nuc), 1e-9),
            PropertyResult("polynomial-below-form", tuple(lower), 1e-9),
            PropertyResult("form-below-polarization-constant", tuple(upper), 2e-5,
                           {"max_form_over_poly": ratio})]


def suite_isometry(seed: int, instances: int = 50, points: int = 50,
                   budget: SearchBudget = DEFAULT_BUDGET) -> list[PropertyResult]:
    res = []
    for i in range(instances):
        rng = _rng(seed, 9, i)
        E = random_space(rng, int(rng.integers(1, 4)))
        A = make_pointwise_algebra(int(rng.integers(1, 4)), random_norm(rng))
        K = random_compact(rng, points, E)
        funcs = []
        for _ in range(3):
            k = int(rng.integers(0, 3))
            funcs.append(LinearMonomial(cgauss(rng, k, E.dim), E))
        t = TensorElement(tuple(funcs), cgauss(rng, 3, A.dim), A)
        inj = injective_tensor_norm(t, K, SearchBudget(budget.samples, budget.refine_steps, seed))
        res.append(abs(inj.value - uniform_norm_on_K(t, K, A)))
    return [PropertyResult("injective-equals-uniform", tuple(res), 2e-6)]


# ---------------------------------------------------------------------------
# tensorization
# ---------------------------------------------------------------------------

def suite_tensorize_exact(seed: int, instances: int = 50, points: int = 100) -> list[PropertyResult]:
    res, bounds = [], []
    for i in range(instances):
        rng = _rng(seed, 7, i)
        E = random_space(rng, int(rng.integers(1, 4)))
        A = random_algebra(rng, int(rng.integers(1, 4)))
        P = random_polynomial(rng, int(rng.integers(0, 4)), E, A)
        K = random_compact(rng, points, E)
        approx = finite_rank_identity_approx(E, K)
        out = tensorize(P, K, approx)
        res.append(verify_tensorization(P, out.tensor, K))
        bounds.append(out.error_bound)
    return [PropertyResult("tensorize-exact", tuple(res), 1e-9),
            PropertyResult("tensorize-exact-bound-zero", tuple(bounds), 0.0)]


def suite_tensorize_bound(seed: int, instances: int = 50, points: int = 100) -> list[PropertyResult]:
    res, eps, ratios = [], [], []
    for i in range(instances):
        rng = _rng(seed, 8, i)
        d = int(rng.integers(2, 4))
        E = random_space(rng, d)
        A = random_algebra(rng, int(rng.integers(1, 4)))
        P = random_polynomial(rng, int(rng.integers(1, 4)), E, A)
        K = random_compact(rng, points, E)
        approx = finite_rank_identity_approx(E, K, rank=int(rng.integers(1, d)), seed=seed,
                                             restarts=0, polish=2)
        out = tensorize(P, K, approx)
        measured = verify_tensorization(P, out.tensor, K)
        res.append(max(0.0, measured - out.error_bound))
        eps.append(approx.epsilon)
        ratios.append(measured / out.error_bound if out.error_bound > 0 else math.inf)
    # every instance must be genuinely inexact
    inexact = tuple(0.0 if e > 0 else 1.0 for e in eps)
    return [PropertyResult("tensorize-within-bound", tuple(res), 0.0,
                           {"max_measured_over_bound": max(ratios, default=0.0)}),
            PropertyResult("tensorize-epsilon-positive", inexact, 0.0,
                           {"min_epsilon": min(eps, default=0.0)})]


# ---------------------------------------------------------------------------
# characters and hulls
# ---------------------------------------------------------------------------

def brute_force_characters_dim2(A) -> list[np.ndarray]:
    """Characters of a 2-dimensional algebra from the multiplicativity equations.

    ``phi(1) = 1`` leaves one free parameter ``t`` (``phi = phi0 + t n``); each
    equation ``phi(e_i e_j) = phi_i phi_j`` is a quadratic in ``t``.  The roots
    of the first nontrivial one that satisfy every other equation are kept.
    """
    if A.dim != 2:
        raise ValueError("brute force is implemented for dimension 2")
    one = A.identity
    phi0 = one.conj() / np.vdot(one, one).real
    nvec = np.array([-one[1], one[0]], dtype=complex)
    polys = []
    for i in range(2):
        for j in range(i, 2):
            c = A.structure[i, j]
            polys.append(np.array([-nvec[i] * nvec[j],
                                   nvec @ c - phi0[i] * nvec[j] - nvec[i] * phi0[j],
                                   phi0 @ c - phi0[i] * phi0[j]]))
    scale = max(float(np.max(np.abs(p))) for p in polys)
    nontrivial = [p for p in polys if np.max(np.abs(p)) > 1e-12 * scale]
    if not nontrivial:
        raise ValueError("multiplicativity equations are degenerate")
    lead = nontrivial[0]
    if abs(lead[0]) <= 1e-12 * scale:
        lead = lead[1:]
    roots = np.roots(lead)
    # a double root (square-zero radical) comes back split by ~sqrt(eps); its centroid is exact
    if len(roots) == 2 and abs(roots[0] - roots[1]) <= 1e-6 * max(1.0, float(np.max(np.abs(roots)))):
        roots = np.array([roots.mean()])
    out = []
    for t in roots:
        if all(abs(np.polyval(p, t)) <= 1e-8 * scale for p in nontrivial[1:]):
            phi = phi0 + t * nvec
            if not any(np.allclose(phi, q, atol=1e-8) for q in out):
                out.append(phi)
    return out


def _set_distance(found: list[np.ndarray], expected: list[np.ndarray]) -> float:
    if len(found) != len(expected):
        return math.inf
    worst = 0.0
    for f in found:
        worst = max(worst, min(float(np.max(np.abs(f - g))) for g in expected))
    return worst


def suite_characters(seed: int, instances: int = 10) -> list[PropertyResult]:
    count, valid, lour = [], [], []
    rng = _rng(seed, 10, 0)
    for dim in range(1, 7):
        A = make_pointwise_algebra(dim, random_norm(rng))
        chars = enumerate_characters(A)
        found = [c.functional for c in chars]
        count.append(_set_distance(found, list(np.eye(dim, dtype=complex))))
        for c in chars:
            chk = validate_character(A, c.functional, tol=1e-10)
            valid.append(max(chk.multiplicative_residual, chk.unit_residual))
    for i in range(instances):
        A = random_lourenco_algebra(_rng(seed, 10, i + 1), 2)
        found = [c.functional for c in enumerate_characters(A)]
        lour.append(_set_distance(found, brute_force_characters_dim2(A)))
    return [PropertyResult("pointwise-coordinate-characters", tuple(count), 1e-10),
            PropertyResult("pointwise-validation", tuple(valid), 1e-10),
            PropertyResult("lourenco-dim2-brute-force", tuple(lour), 1e-10)]


def suite_hull(seed: int, samples: int = 2048, refine: int = 200) -> list[PropertyResult]:
    K = circle(64)
    b = SearchBudget(samples, refine, seed)
    inside = hull_membership(HullQuery(np.zeros(1), K, 4, 4, b))
    outside = hull_membership(HullQuery(np.array([2.0]), K, 4, 4, b))
    ok_out = outside.violated and outside.margin >= 0.9 and outside.degree == 1
    return [PropertyResult("hull-inside-no-violation", (0.0 if inside.verdict == NO_VIOLATION else 1.0,), 0.0,
                           {"ratio": inside.ratio}),
            PropertyResult("hull-outside-degree1-violation", (0.0 if ok_out else 1.0,), 0.0,
                           {"margin": outside.margin, "degree": outside.degree})]


def suite_product_characters(seed: int, instances: int = 50, samples: int = 512) -> list[PropertyResult]:
    K = circle(64)
    points = [np.zeros(1), np.array([0.3 + 0.2j]), K.points[5]]
    budget = SearchBudget(samples, 50, seed)
    certs = [hull_membership(HullQuery(a, K, 2, 2, budget)) for a in points]
    certified = tuple(0.0 if c.verdict == NO_VIOLATION else 1.0 for c in certs)
    E = K.space
    mult, bound = [], []
    for i in range(instances):
        rng = _rng(seed, 12, i)
        A = make_pointwise_algebra(2, random_norm(rng))
        j = i % len(points)
        P = random_polynomial(rng, int(rng.integers(1, 4)), E, A)
        Q = random_polynomial(rng, int(rng.integers(1, 4)), E, A)
        phi = np.eye(2)[i % 2]
        try:
            chi = product_character(points[j], phi, [P, Q], K, certificate=certs[j])
            mult.append(chi.multiplicative_residual)
            bound.append(max(0.0, chi.bound_excess))
        except NotCertifiedError:
            mult.append(math.inf)
            bound.append(math.inf)
    return [PropertyResult("points-certified", certified, 0.0),
            PropertyResult("product-character-multiplicative", tuple(mult), 1e-9),
            PropertyResult("product-character-bounded", tuple(bound), 1e-9)]


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

SUITES: dict[str, Callable[..., list[PropertyResult]]] = {
    "polarization": suite_polarization,
    "products": suite_products,
    "roots-of-unity": suite_roots_of_unity,
    "leibniz": suite_leibniz,
    "growth-bound": suite_growth_bound,
    "norm-sandwich": suite_norm_sandwich,
    "tensorize-exact": suite_tensorize_exact,
    "tensorize-bound": suite_tensorize_bound,
    "isometry": suite_isometry,
    "characters": suite_characters,
    "hull": suite_hull,
    "product-characters": suite_product_characters,
}

# suites whose results depend on seeded searches
STOCHASTIC = ("growth-bound", "norm-sandwich", "tensorize-bound", "isometry", "hull", "product-characters")


def verify_suite(name: str, seed: int = 0, sizes: dict | None = None) -> SuiteReport:
    """Run suite ``name``; ``sizes`` overrides keyword parameters such as ``instances``."""
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
    fn = SUITES[name]
    kwargs = dict(sizes or {})
    allowed = set(inspect.signature(fn).parameters) - {"seed"}
    unknown = set(kwargs) - allowed
    if unknown:
        raise ConfigError(f"suite {name!r} has no size parameters {sorted(unknown)}; allowed: {sorted(allowed)}")
    props = fn(seed, **kwargs)
    return SuiteReport(name, int(seed), tuple(props))
