"""``polyalg`` command line: JSON in, canonical JSON out.

Every subcommand takes its parameters from ``--config`` (a RunConfig JSON
document with named ``objects``) and/or flags; flags win.  Object
arguments may be a name from ``objects``, a path to a JSON file or inline
JSON.  Exit codes: 0 success, 1 invalid configuration, 2 computation error,
3 suite failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Any

import numpy as np

from .algebra import enumerate_characters
from .errors import ConfigError, PolyalgError
from .hulls import HullQuery, character_from_point, hull_membership, product_character
from .io import (
    Resolver,
    canonical_dumps,
    certificate_to_json,
    compact_set_from_json,
    decode_complex,
    estimate_to_json,
    form_to_json,
    loads,
    polynomial_from_json,
    polynomial_to_json,
    tensor_from_json,
    tensor_to_json,
)
from .norms import (
    injective_tensor_norm,
    nuclear_norm_upper,
    operator_norm,
    sup_norm_unit_ball,
    uniform_norm_on_K,
)
from .polynomials import (
    LinearOperator,
    PolynomialSum,
    PowerSumRep,
    as_polynomial_sum,
    polarize,
    product_polynomials,
)
from .search import SearchBudget
from .suites import SUITES, verify_suite
from .tensor import finite_rank_identity_approx, tensorize, verify_tensorization

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_SUITE = 0, 1, 2, 3

COMMANDS = ("eval", "polarize", "product", "norm", "hull", "tensorize", "character", "verify-suite", "report")
STOCHASTIC = {"norm", "hull", "tensorize", "character", "verify-suite", "report"}
NORM_KINDS = ("unit-ball", "uniform-K", "nuclear-upper", "operator", "tensor-eps")


class SuiteFailure(Exception):
    def __init__(self, payload: dict):
        super().__init__("suite failed")
        self.payload = payload


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def _read_json_file(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _reference(value: Any) -> Any:
    """Flag value -> name, inline JSON document or file contents."""
    if not isinstance(value, str):
        return value
    text = value.strip()
    if text[:1] in "{[":
        return loads(text)
    if os.path.isfile(value):
        return _read_json_file(value)
    return value


def _parsing(key: str, fn):
    # malformed objects are configuration errors, not computation errors
    try:
        return fn()
    except ConfigError:
        raise
    except (PolyalgError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"invalid {key!r}: {exc}") from exc


class Context:
    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.resolver = Resolver(dict(cfg.get("objects", {})))

    def get(self, key: str, default: Any = None, required: bool = False) -> Any:
        if key in self.cfg and self.cfg[key] is not None:
            return self.cfg[key]
        if required:
            raise ConfigError(f"missing required parameter {key!r}")
        return default

    def obj(self, key: str, parser):
        return _parsing(key, lambda: self.resolver.resolve(_reference(self.get(key, required=True)), parser))

    def vector(self, key: str) -> np.ndarray:
        return _parsing(key, lambda: decode_complex(_reference(self.get(key, required=True)), 1))

    def points(self, key: str) -> np.ndarray:
        return _parsing(key, lambda: decode_complex(_reference(self.get(key, required=True)), 2))

    @property
    def seed(self) -> int:
        return int(self.get("seed", required=True))

    def budget(self) -> SearchBudget:
        return SearchBudget(int(self.get("samples", 4096)), int(self.get("refine", 200)), self.seed)


def _poly(doc, resolver):
    return polynomial_from_json(doc, resolver)


def _values(P, X) -> list:
    return [np.asarray(v) for v in as_polynomial_sum(P).evaluate(X)]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_eval(ctx: Context) -> dict:
    P = ctx.obj("polynomial", _poly)
    if ctx.get("point") is not None:
        return {"value": as_polynomial_sum(P).evaluate(ctx.vector("point"))}
    return {"values": _values(P, ctx.points("points"))}


def cmd_polarize(ctx: Context) -> dict:
    P = ctx.obj("polynomial", _poly)
    if isinstance(P, PolynomialSum):
        return {"forms": [form_to_json(polarize(p)) for p in P.parts if p.degree > 0]}
    return form_to_json(polarize(P))


def cmd_product(ctx: Context) -> dict:
    P, Q = ctx.obj("left", _poly), ctx.obj("right", _poly)
    PQ = product_polynomials(P, Q)
    out = {"product": polynomial_to_json(PQ), "terms": sum(p.n_terms for p in PQ.parts)}
    if ctx.get("points") is not None:
        out["values"] = _values(PQ, ctx.points("points"))
    return out


def _operator(doc, resolver) -> LinearOperator:
    P = polynomial_from_json(doc, resolver)
    if not isinstance(P, PowerSumRep) or P.degree != 1 or P.n_terms != 1:
        raise ConfigError("operator objects are degree-1 polynomials with a single term")
    return LinearOperator(P.weights[0] * P.matrices[0], P.space, P.algebra)


def cmd_norm(ctx: Context) -> dict:
    kind = ctx.get("kind", required=True)
    if kind not in NORM_KINDS:
        raise ConfigError(f"unknown norm kind {kind!r}; choose from {', '.join(NORM_KINDS)}")
    budget = ctx.budget()
    if kind == "unit-ball":
        P = ctx.obj("object", _poly)
        if isinstance(P, PolynomialSum):
            if len(P.parts) != 1:
                raise ConfigError("unit-ball norms need a homogeneous polynomial")
            P = P.parts[0]
        return estimate_to_json(sup_norm_unit_ball(P, budget))
    if kind == "operator":
        return estimate_to_json(operator_norm(ctx.obj("object", _operator), budget))
    if kind == "nuclear-upper":
        return {"value": nuclear_norm_upper(ctx.obj("object", _poly), budget), "witness": None,
                "budget": budget.to_dict()}
    K = ctx.obj("K", compact_set_from_json)
    if kind == "uniform-K":
        P = ctx.obj("object", _poly)
        vals = as_polynomial_sum(P).evaluate(K.points)
        idx = int(np.argmax(P.algebra.norm_of(vals)))
        return {"value": uniform_norm_on_K(P, K), "witness": K.points[idx], "budget": None, "exact": True}
    t = ctx.obj("object", tensor_from_json)
    est = injective_tensor_norm(t, K, budget)
    out = estimate_to_json(est)
    out["uniform_norm"] = uniform_norm_on_K(t, K, t.algebra)
    return out


def _hull_query(ctx: Context, K) -> HullQuery:
    return HullQuery(ctx.vector("candidate"), K, int(ctx.get("degree_cap", 4)), int(ctx.get("terms_cap", 4)),
                     SearchBudget(int(ctx.get("samples", 2048)), int(ctx.get("refine", 200)), ctx.seed))


def cmd_hull(ctx: Context) -> dict:
    K = ctx.obj("K", compact_set_from_json)
    return certificate_to_json(hull_membership(_hull_query(ctx, K)))


def cmd_tensorize(ctx: Context) -> dict:
    P = ctx.obj("polynomial", _poly)
    K = ctx.obj("K", compact_set_from_json)
    rank = ctx.get("rank")
    approx = finite_rank_identity_approx(K.space, K, None if rank is None else int(rank), seed=ctx.seed)
    res = tensorize(P, K, approx)
    return {"tensor": tensor_to_json(res.tensor), "measured_error": verify_tensorization(P, res.tensor, K),
            "certified_bound": res.error_bound, "epsilon": approx.epsilon, "rank": approx.rank}


def _generators(doc, resolver) -> list:
    items = doc.get("generators") if isinstance(doc, dict) else doc
    if not isinstance(items, list) or not items:
        raise ConfigError("generator file must hold a nonempty list of polynomials")
    return [resolver.resolve(g, polynomial_from_json) for g in items]


def cmd_character(ctx: Context) -> dict:
    K = ctx.obj("K", compact_set_from_json)
    gens = ctx.obj("generators", _generators)
    cert = hull_membership(_hull_query(ctx, K))
    a = cert.query.candidate
    A = as_polynomial_sum(gens[0]).algebra
    if A.dim == 1 and ctx.get("phi") is None and ctx.get("character") is None:
        chi = character_from_point(a, gens, K, certificate=cert)
        phi = np.ones(1, dtype=complex)
    else:
        if ctx.get("phi") is not None:
            phi = ctx.vector("phi")
        else:
            chars = enumerate_characters(A)
            idx = int(ctx.get("character", 0))
            if not 0 <= idx < len(chars):
                raise ConfigError(f"character index {idx} out of range (algebra has {len(chars)})")
            phi = chars[idx].functional
        chi = product_character(a, phi, gens, K, certificate=cert)
    return {"phi": phi, "point": a, "values": [chi(P) for P in gens],
            "multiplicative_residual": chi.multiplicative_residual, "bound_excess": chi.bound_excess,
            "certificate": certificate_to_json(cert)}


def _sizes(ctx: Context) -> dict:
    sizes = dict(ctx.get("sizes", {}) or {})
    if ctx.get("instances") is not None:
        sizes["instances"] = int(ctx.get("instances"))
    return sizes


def cmd_verify_suite(ctx: Context) -> dict:
    report = verify_suite(ctx.get("suite", required=True), ctx.seed, _sizes(ctx)).to_dict()
    if not report["pass"]:
        raise SuiteFailure(report)
    return report


def cmd_report(ctx: Context) -> dict:
    sizes = ctx.get("sizes", {}) or {}
    reports = [verify_suite(name, ctx.seed, sizes.get(name)).to_dict() for name in SUITES]
    out = {"seed": ctx.seed, "pass": all(r["pass"] for r in reports), "suites": reports}
    if not out["pass"]:
        raise SuiteFailure(out)
    return out


DISPATCH = {
    "eval": cmd_eval,
    "polarize": cmd_polarize,
    "product": cmd_product,
    "norm": cmd_norm,
    "hull": cmd_hull,
    "tensorize": cmd_tensorize,
    "character": cmd_character,
    "verify-suite": cmd_verify_suite,
    "report": cmd_report,
}


def run(config: dict) -> dict:
    """Dispatch a RunConfig document; raises on error."""
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    command = config.get("command")
    if command not in DISPATCH:
        raise ConfigError(f"unknown command {command!r}")
    if command in STOCHASTIC and config.get("seed") is None:
        raise ConfigError(f"command {command!r} is stochastic and needs a seed")
    return DISPATCH[command](Context(config))


# ---------------------------------------------------------------------------
# argparse
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


FLAGS = {
    "eval": [("--polynomial",), ("--point",), ("--points",)],
    "polarize": [("--polynomial",)],
    "product": [("--left",), ("--right",), ("--points",)],
    "norm": [("--object",), ("--kind",), ("--K",), ("--samples", int), ("--refine", int)],
    "hull": [("--candidate",), ("--K",), ("--degree-cap", int), ("--terms-cap", int),
             ("--samples", int), ("--refine", int)],
    "tensorize": [("--polynomial",), ("--K",), ("--rank", int)],
    "character": [("--candidate",), ("--K",), ("--generators",), ("--phi",), ("--character", int),
                  ("--degree-cap", int), ("--terms-cap", int), ("--samples", int), ("--refine", int)],
    "verify-suite": [("--suite",), ("--instances", int)],
    "report": [],
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polyalg", description="Polynomials with values in finite-dimensional Banach algebras.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="RunConfig JSON file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="also write the JSON result here")
        for flag in FLAGS[name]:
            p.add_argument(flag[0], type=flag[1] if len(flag) > 1 else str)
    return parser


def _config_from_args(args: argparse.Namespace) -> dict:
    cfg = _read_json_file(args.config) if args.config else {}
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("command") not in (None, args.command):
        raise ConfigError(f"config is for command {cfg['command']!r}, not {args.command!r}")
    cfg = dict(cfg, command=args.command)
    for key, val in vars(args).items():
        if key in ("config", "out", "command") or val is None:
            continue
        cfg[key] = val
    return cfg


def _emit(payload: dict, out_path: str | None) -> None:
    text = canonical_dumps(payload) + "\n"
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv: list[str] | None = None) -> int:
    out_path = None
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise ConfigError("missing subcommand; choose from " + ", ".join(COMMANDS))
        out_path = args.out
        cfg = _config_from_args(args)
        payload = run(cfg)
    except ConfigError as exc:
        print(f"polyalg: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SuiteFailure as exc:
        _emit(exc.payload, out_path)
        print("polyalg: suite failed", file=sys.stderr)
        return EXIT_SUITE
    except (PolyalgError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"polyalg: computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    _emit(payload, out_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
