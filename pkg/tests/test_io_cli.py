from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyalg import cli, suites
from polyalg.algebra import FiniteSpace, NormSpec, alg_mul, make_pointwise_algebra
from polyalg.io import (
    Resolver,
    algebra_from_json,
    algebra_to_json,
    canonical_dumps,
    compact_set_from_json,
    compact_set_to_json,
    decode_complex,
    format_float,
    form_from_json,
    form_to_json,
    loads,
    norm_from_json,
    norm_to_json,
    polynomial_from_json,
    polynomial_to_json,
    space_from_json,
    space_to_json,
    tensor_from_json,
    tensor_to_json,
)
from polyalg.polynomials import polarize
from polyalg.random_instances import (
    cgauss,
    random_algebra,
    random_compact,
    random_lourenco_algebra,
    random_polynomial,
    random_power_sum,
    random_space,
)
from polyalg.suites import PropertyResult
from polyalg.tensor import LinearMonomial, TensorElement

seeds = st.integers(0, 2**32 - 1)

SQUARE = {"degree": 2, "terms": [{"weight": [1, 0], "matrix": [[[1, 0]]]}]}


def roundtrip(obj, to_json, from_json):
    text = canonical_dumps(to_json(obj))
    again = canonical_dumps(to_json(from_json(loads(text))))
    assert again == text
    return text


# -- canonical formatting -------------------------------------------------------------

@pytest.mark.parametrize("x, text", [(9.0, "9.0"), (0.1, "0.10000000000000001"), (-2.5e-300, "-2.5e-300"),
                                     (1e22, "1e+22"), (0.0, "0.0")])
def test_format_float(x, text):
    assert format_float(x) == text
    assert float(text) == x


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_roundtrip_is_lossless(x):
    assert float(json.loads(format_float(x))) == x


def test_canonical_key_order_and_complex():
    assert canonical_dumps({"b": 1, "a": 1 + 2j}) == '{"a": [1.0, 2.0], "b": 1}'
    assert canonical_dumps(np.array([1 + 0j, 2j])) == "[[1.0, 0.0], [0.0, 2.0]]"


def test_decode_complex_shapes():
    np.testing.assert_array_equal(decode_complex([[1, 2], [3, 4]], 1), [1 + 2j, 3 + 4j])
    np.testing.assert_array_equal(decode_complex([1, 3], 1), [1, 3])
    with pytest.raises(ValueError):
        decode_complex([[[1, 2, 3]]], 1)


# -- schema round-trips ---------------------------------------------------------------

@given(seeds)
def test_norm_and_space_roundtrip(seed):
    rng = np.random.default_rng(seed)
    E = random_space(rng, int(rng.integers(1, 5)))
    roundtrip(E, space_to_json, space_from_json)
    roundtrip(E.norm, norm_to_json, norm_from_json)


@given(seeds)
def test_algebra_roundtrip(seed):
    rng = np.random.default_rng(seed)
    roundtrip(random_algebra(rng, int(rng.integers(1, 4))), algebra_to_json, algebra_from_json)
    roundtrip(random_lourenco_algebra(rng, 3), algebra_to_json, algebra_from_json)


@settings(max_examples=15)
@given(seeds)
def test_polynomial_roundtrip(seed):
    rng = np.random.default_rng(seed)
    E, A = random_space(rng, 2), random_algebra(rng, 2)
    roundtrip(random_power_sum(rng, int(rng.integers(0, 4)), E, A), polynomial_to_json, polynomial_from_json)
    roundtrip(random_polynomial(rng, 2, E, A), polynomial_to_json, polynomial_from_json)


def test_form_compact_and_tensor_roundtrip(rng):
    E, A = random_space(rng, 2), random_algebra(rng, 2)
    roundtrip(polarize(random_power_sum(rng, 2, E, A)), form_to_json, form_from_json)
    roundtrip(random_compact(rng, 5, E), compact_set_to_json, compact_set_from_json)
    t = TensorElement(tuple(LinearMonomial(cgauss(rng, k, 2), E) for k in (0, 2)), cgauss(rng, 2, 2), A)
    text = roundtrip(t, tensor_to_json, tensor_from_json)
    back = tensor_from_json(loads(text))
    X = random_compact(rng, 4, E).points
    np.testing.assert_allclose(back.evaluate(X), t.evaluate(X), atol=1e-13)


def test_polynomial_defaults():
    P = polynomial_from_json(SQUARE)
    assert P.space.dim == 1 and P.space.norm.kind == "sup"
    assert P.algebra.dim == 1


def test_named_objects_resolve():
    r = Resolver({"E": {"dim": 2, "norm": {"kind": "p", "p": 1}},
                  "A": {"kind": "pointwise", "dim": 1}})
    P = polynomial_from_json({"degree": 1, "space": "E", "algebra": "A",
                              "terms": [{"weight": [1, 0], "matrix": [[[1, 0], [2, 0]]]}]}, r)
    assert P.space.norm.p == 1
    with pytest.raises(ValueError):
        r.resolve("missing", space_from_json)


def test_circle_shortcut():
    K = compact_set_from_json({"circle": {"n": 8, "radius": 2}})
    assert len(K) == 8 and K.radius == pytest.approx(2.0)


# -- command line ----------------------------------------------------------------------

def run_cli(capsys, *args):
    code = cli.main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_square(capsys):
    code, out, _ = run_cli(capsys, "eval", "--polynomial", json.dumps(SQUARE), "--point", "[[3, 0]]")
    assert code == 0
    assert out.strip() == '{"value": [[9.0, 0.0]]}'


def test_product_then_eval_matches_separate_evaluations(capsys, tmp_path, rng):
    E = FiniteSpace(2, NormSpec.pnorm(2))
    A = make_pointwise_algebra(2, NormSpec.sup())
    P, Q = random_power_sum(rng, 1, E, A), random_power_sum(rng, 1, E, A)
    cfg = {"command": "product", "objects": {"P": polynomial_to_json(P), "Q": polynomial_to_json(Q)},
           "left": "P", "right": "Q"}
    path = tmp_path / "cfg.json"
    path.write_text(canonical_dumps(cfg))
    code, out, _ = run_cli(capsys, "product", "--config", str(path))
    assert code == 0
    doc = json.loads(out)
    assert doc["terms"] == P.n_terms * Q.n_terms * 4
    x = cgauss(rng, 2)
    code, out, _ = run_cli(capsys, "eval", "--polynomial", json.dumps(doc["product"]),
                           "--point", canonical_dumps(x))
    got = decode_complex(json.loads(out)["value"], 1)
    np.testing.assert_allclose(got, alg_mul(A, P.evaluate(x), Q.evaluate(x)), atol=1e-13)


def test_verify_suite_is_byte_deterministic(capsys):
    _, first, _ = run_cli(capsys, "verify-suite", "--suite", "polarization", "--seed", "42")
    code, second, _ = run_cli(capsys, "verify-suite", "--suite", "polarization", "--seed", "42")
    assert code == 0 and first == second
    doc = json.loads(first)
    assert doc["pass"] and doc["seed"] == 42
    assert doc["properties"][0]["instances"] == 200


def test_out_file_matches_stdout(capsys, tmp_path):
    target = tmp_path / "result.json"
    code, out, _ = run_cli(capsys, "norm", "--object", json.dumps(SQUARE), "--kind", "unit-ball",
                           "--seed", "1", "--samples", "256", "--refine", "50", "--out", str(target))
    assert code == 0 and target.read_text() == out
    doc = json.loads(out)
    assert doc["value"] == pytest.approx(1.0)
    assert doc["budget"] == {"refine_steps": 50, "samples": 256, "seed": 1}


def test_hull_command(capsys):
    code, out, _ = run_cli(capsys, "hull", "--candidate", "[2]", "--K", '{"circle": {"n": 64}}',
                           "--seed", "3", "--samples", "256", "--degree-cap", "1", "--terms-cap", "1")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "violated" and doc["degree"] == 1


def test_tensorize_command(capsys):
    poly = {"degree": 2, "terms": [{"weight": [1, 0], "matrix": [[[1, 0], [1, 0]]]}]}
    K = {"points": [[[1, 0], [0, 0]], [[0, 0], [1, 0]], [[0.5, 0], [0.5, 0]]]}
    code, out, _ = run_cli(capsys, "tensorize", "--polynomial", json.dumps(poly), "--K", json.dumps(K),
                           "--seed", "0")
    doc = json.loads(out)
    assert code == 0
    assert doc["certified_bound"] == 0.0 and doc["measured_error"] <= 1e-12
    assert len(doc["tensor"]["pairs"]) == 3


def test_character_command(capsys, tmp_path):
    gens = tmp_path / "gens.json"
    gens.write_text(json.dumps({"generators": [SQUARE, {"degree": 0, "constant": [[2, 0]]}]}))
    code, out, _ = run_cli(capsys, "character", "--candidate", "[0.5]", "--K", '{"circle": {"n": 64}}',
                           "--generators", str(gens), "--seed", "1", "--samples", "256", "--degree-cap", "2")
    doc = json.loads(out)
    assert code == 0
    assert doc["values"] == [[0.25, 0.0], [2.0, 0.0]]
    assert doc["multiplicative_residual"] <= 1e-12


def test_exit_code_invalid_config(capsys):
    code, out, err = run_cli(capsys, "eval", "--polynomial", '{"degree": 2}', "--point", "[1]")
    assert code == 1 and out == "" and "invalid configuration" in err
    assert run_cli(capsys, "nonsense")[0] == 1
    assert run_cli(capsys, "norm", "--object", json.dumps(SQUARE), "--kind", "unit-ball")[0] == 1  # no seed
    assert run_cli(capsys, "verify-suite", "--suite", "nope", "--seed", "1")[0] == 1


def test_exit_code_computation_error(capsys):
    constant = {"degree": 0, "constant": [[1, 0]]}
    code, _, err = run_cli(capsys, "polarize", "--polynomial", json.dumps(constant))
    assert code == 2 and "NoPolarizationError" in err
    code, _, err = run_cli(capsys, "character", "--candidate", "[2]", "--K", '{"circle": {"n": 16}}',
                           "--generators", json.dumps([SQUARE]), "--seed", "1", "--samples", "128",
                           "--degree-cap", "1")
    assert code == 2 and "NotCertifiedError" in err


def test_exit_code_suite_failure(capsys, monkeypatch):
    def failing(seed, instances=1):
        return [PropertyResult("always-fails", (1.0,) * instances, 0.0)]

    monkeypatch.setitem(suites.SUITES, "failing", failing)
    code, out, err = run_cli(capsys, "verify-suite", "--suite", "failing", "--seed", "0")
    assert code == 3 and json.loads(out)["pass"] is False and "suite failed" in err


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "polyalg.cli", "eval", "--polynomial", json.dumps(SQUARE),
                           "--point", "[3]"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.strip() == '{"value": [[9.0, 0.0]]}'
