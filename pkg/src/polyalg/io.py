"""Canonical JSON for spaces, algebras, polynomials, point sets and results.

Complex numbers are ``[re, im]`` pairs, floats are written with 17
significant digits and object keys are sorted, so equal inputs serialize to
equal bytes.  Documents may refer to previously defined objects by name
through a :class:`Resolver`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .algebra import (
    FiniteBanachAlgebra,
    FiniteSpace,
    NormSpec,
    make_lourenco_algebra,
    make_pointwise_algebra,
    scalar_algebra,
)
from .errors import ConfigError
from .hulls import HullCertificate
from .norms import CompactSet
from .polynomials import PolynomialSum, PowerSumRep, SymmetricForm
from .random_instances import circle
from .search import NormEstimate, SearchBudget
from .tensor import TensorElement


# ---------------------------------------------------------------------------
# canonical writer
# ---------------------------------------------------------------------------

def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def to_jsonable(obj: Any) -> Any:
    """Plain Python structure with complex values as ``[re, im]``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return np.stack([obj.real, obj.imag], axis=-1).tolist()
        return obj.tolist()
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(obj: Any, out: list[str]) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            if i:
                out.append(", ")
            out.append(json.dumps(k))
            out.append(": ")
            _emit(obj[k], out)
        out.append("}")
    elif isinstance(obj, list):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _emit(v, out)
        out.append("]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif obj is None:
        out.append("null")
    else:
        out.append(json.dumps(obj))


def canonical_dumps(obj: Any) -> str:
    out: list[str] = []
    _emit(to_jsonable(obj), out)
    return "".join(out)


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc


def decode_complex(x, ndim: int) -> np.ndarray:
    """Array of ``ndim`` dimensions from nested ``[re, im]`` pairs (or plain reals)."""
    try:
        arr = np.asarray(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"expected numeric array, got {x!r:.80}") from exc
    if arr.ndim == ndim + 1 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == ndim:
        return arr.astype(complex)
    raise ConfigError(f"expected a {ndim}-dimensional array of [re, im] pairs, got shape {arr.shape}")


def _need(doc: dict, key: str, what: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"{what} must be a JSON object")
    if key not in doc:
        raise ConfigError(f"{what} is missing {key!r}")
    return doc[key]


# ---------------------------------------------------------------------------
# named objects
# ---------------------------------------------------------------------------

@dataclass
class Resolver:
    """Named-object table; values are raw JSON until first use."""

    objects: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict)

    def resolve(self, value, parser):
        if isinstance(value, str):
            if value not in self.objects:
                raise ConfigError(f"unknown object name {value!r}")
            key = (value, parser.__name__)
            if key not in self._cache:
                self._cache[key] = parser(self.objects[value], self)
            return self._cache[key]
        return parser(value, self)


def _sub(doc, key, parser, resolver, default=None):
    if isinstance(doc, dict) and doc.get(key) is not None:
        return (resolver or Resolver()).resolve(doc[key], parser)
    return default


# ---------------------------------------------------------------------------
# norms, spaces, algebras
# ---------------------------------------------------------------------------

def norm_to_json(spec: NormSpec) -> dict:
    if spec.kind == "p":
        return {"kind": "p", "p": spec.p}
    if spec.kind == "sup":
        return {"kind": "sup"}
    return {"kind": "lourenco", "psi": spec.psi, "e": spec.e, "base": norm_to_json(spec.base)}


def norm_from_json(doc, resolver: Resolver | None = None) -> NormSpec:
    kind = _need(doc, "kind", "norm")
    if kind == "p":
        p = doc.get("p", 2.0)
        return NormSpec.pnorm(math.inf if p in ("inf", "Infinity") else float(p))
    if kind == "sup":
        return NormSpec.sup()
    if kind == "lourenco":
        return NormSpec.lourenco(decode_complex(_need(doc, "psi", "norm"), 1),
                                 decode_complex(_need(doc, "e", "norm"), 1),
                                 norm_from_json(_need(doc, "base", "norm")))
    raise ConfigError(f"unknown norm kind {kind!r}")


def space_to_json(E: FiniteSpace) -> dict:
    return {"dim": E.dim, "norm": norm_to_json(E.norm)}


def space_from_json(doc, resolver: Resolver | None = None) -> FiniteSpace:
    dim = int(_need(doc, "dim", "space"))
    norm = norm_from_json(doc["norm"]) if "norm" in doc else NormSpec.sup()
    return FiniteSpace(dim, norm)


def algebra_to_json(A: FiniteBanachAlgebra) -> dict:
    return {"dim": A.dim, "structure": A.structure, "identity": A.identity,
            "norm": norm_to_json(A.norm), "constant": A.constant}


def algebra_from_json(doc, resolver: Resolver | None = None) -> FiniteBanachAlgebra:
    """Full structure-tensor form, or the shortcuts ``pointwise``/``lourenco``/``scalar``."""
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind == "scalar":
        return scalar_algebra()
    if kind == "pointwise":
        norm = norm_from_json(doc["norm"]) if "norm" in doc else NormSpec.sup()
        return make_pointwise_algebra(int(_need(doc, "dim", "algebra")), norm)
    if kind == "lourenco":
        E = _sub(doc, "space", space_from_json, resolver)
        if E is None:
            raise ConfigError("lourenco algebra shortcut needs a space")
        return make_lourenco_algebra(E, decode_complex(_need(doc, "psi", "algebra"), 1),
                                     decode_complex(_need(doc, "e", "algebra"), 1))
    dim = int(_need(doc, "dim", "algebra"))
    structure = decode_complex(_need(doc, "structure", "algebra"), 3)
    identity = decode_complex(_need(doc, "identity", "algebra"), 1)
    if structure.shape != (dim, dim, dim) or identity.shape != (dim,):
        raise ConfigError("algebra structure/identity do not match dim")
    norm = norm_from_json(doc["norm"]) if "norm" in doc else NormSpec.sup()
    return FiniteBanachAlgebra(structure, identity, norm, float(doc.get("constant", 1.0)))


# ---------------------------------------------------------------------------
# polynomials and forms
# ---------------------------------------------------------------------------

def polynomial_to_json(P) -> dict:
    """Single power sum, or ``{"parts": [...]}`` for a mixed-degree sum."""
    if isinstance(P, PolynomialSum):
        if len(P.parts) == 1:
            return polynomial_to_json(P.parts[0])
        return {"parts": [polynomial_to_json(p) for p in P.parts]}
    doc = {"degree": P.degree, "space": space_to_json(P.space), "algebra": algebra_to_json(P.algebra)}
    if P.degree == 0:
        doc["constant"] = P.constant
        doc["terms"] = []
    else:
        doc["terms"] = [{"weight": complex(w), "matrix": m} for w, m in zip(P.weights, P.matrices)]
    return doc


def polynomial_from_json(doc, resolver: Resolver | None = None):
    """PowerSumRep (or PolynomialSum for ``parts`` documents).

    Missing ``space`` defaults to the sup-norm space of the matrix column
    count; missing ``algebra`` to the pointwise sup-norm algebra of the row
    count.
    """
    if isinstance(doc, dict) and "parts" in doc:
        parts = [polynomial_from_json(p, resolver) for p in doc["parts"]]
        return PolynomialSum.of(*parts)
    degree = int(_need(doc, "degree", "polynomial"))
    if degree < 0:
        raise ConfigError("polynomial degree must be >= 0")
    terms = doc.get("terms", [])
    E = _sub(doc, "space", space_from_json, resolver)
    A = _sub(doc, "algebra", algebra_from_json, resolver)
    if degree == 0:
        c = decode_complex(_need(doc, "constant", "degree-0 polynomial"), 1)
        A = A or make_pointwise_algebra(c.shape[0], NormSpec.sup())
        E = E or FiniteSpace(1, NormSpec.sup())
        return PowerSumRep.constant_poly(c, E, A)
    if not terms:
        raise ConfigError("polynomial of positive degree needs at least one term")
    weights = np.array([decode_complex(_need(t, "weight", "term"), 0) for t in terms])
    mats = [decode_complex(_need(t, "matrix", "term"), 2) for t in terms]
    if len({m.shape for m in mats}) != 1:
        raise ConfigError("term matrices have different shapes")
    dA, dE = mats[0].shape
    E = E or FiniteSpace(dE, NormSpec.sup())
    A = A or make_pointwise_algebra(dA, NormSpec.sup())
    if (A.dim, E.dim) != (dA, dE):
        raise ConfigError(f"term matrices are {dA}x{dE} but algebra/space dims are {A.dim}/{E.dim}")
    return PowerSumRep(degree, weights, np.stack(mats), E, A)


def form_to_json(T: SymmetricForm) -> dict:
    coeffs = [{"index": list(k), "value": v} for k, v in sorted(T.coeffs.items())]
    return {"degree": T.degree, "coeffs": coeffs,
            "space": space_to_json(T.space), "algebra": algebra_to_json(T.algebra)}


def form_from_json(doc, resolver: Resolver | None = None) -> SymmetricForm:
    E = _sub(doc, "space", space_from_json, resolver)
    A = _sub(doc, "algebra", algebra_from_json, resolver)
    if E is None or A is None:
        raise ConfigError("symmetric form needs space and algebra")
    coeffs = {tuple(int(i) for i in c["index"]): decode_complex(c["value"], 1)
              for c in _need(doc, "coeffs", "form")}
    return SymmetricForm(int(_need(doc, "degree", "form")), coeffs, E, A)


# ---------------------------------------------------------------------------
# point sets and tensors
# ---------------------------------------------------------------------------

def compact_set_to_json(K: CompactSet) -> dict:
    return {"points": K.points, "space": space_to_json(K.space)}


def compact_set_from_json(doc, resolver: Resolver | None = None) -> CompactSet:
    """Explicit ``points`` or ``{"circle": {"n": .., "radius": ..}}`` in ``C``."""
    if isinstance(doc, dict) and "circle" in doc:
        spec = doc["circle"]
        return circle(int(spec.get("n", 64)), float(spec.get("radius", 1.0)))
    pts = decode_complex(_need(doc, "points", "compact set"), 2)
    E = _sub(doc, "space", space_from_json, resolver) or FiniteSpace(pts.shape[1], NormSpec.sup())
    return CompactSet(pts, E)


def tensor_to_json(t: TensorElement) -> dict:
    pairs = []
    for f, a in t.pairs:
        g = f.to_power_sum() if hasattr(f, "to_power_sum") else f
        pairs.append({"f": polynomial_to_json(g), "a": a})
    return {"pairs": pairs, "algebra": algebra_to_json(t.algebra)}


def tensor_from_json(doc, resolver: Resolver | None = None) -> TensorElement:
    A = _sub(doc, "algebra", algebra_from_json, resolver)
    pairs = _need(doc, "pairs", "tensor")
    funcs = tuple(polynomial_from_json(p["f"], resolver) for p in pairs)
    elems = np.array([decode_complex(p["a"], 1) for p in pairs], dtype=complex)
    if A is None:
        A = make_pointwise_algebra(elems.shape[1] if pairs else 1, NormSpec.sup())
    return TensorElement(funcs, elems.reshape(len(pairs), A.dim), A)


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

def budget_to_json(budget: SearchBudget | None):
    return None if budget is None else budget.to_dict()


def estimate_to_json(est: NormEstimate) -> dict:
    return {"value": est.value, "witness": est.witness, "budget": budget_to_json(est.budget),
            "exact": est.exact}


def certificate_to_json(cert: HullCertificate) -> dict:
    q = cert.query
    return {
        "verdict": cert.verdict,
        "margin": cert.margin,
        "ratio": cert.ratio,
        "degree": cert.degree,
        "candidate": q.candidate,
        "caps": {"degree_cap": q.degree_cap, "terms_cap": q.terms_cap},
        "budget": budget_to_json(q.budget),
        "witness": None if cert.witness is None else polynomial_to_json(cert.witness),
    }
