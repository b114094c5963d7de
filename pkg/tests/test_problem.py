"""Tests for reading and writing problem files."""

import json
from fractions import Fraction

import pytest

from diffcoh.corpus import corpus_path, discover_corpus, load_corpus_problem, resolve_problem_path
from diffcoh.errors import InvalidInputError, ProblemFileError
from diffcoh.problem import load_problem, parse_problem, save_problem, serialize_problem
from diffcoh.report import to_json
from tests.conftest import CORPUS_NAMES


def minimal(**overrides):
    doc = {
        "schema": 1,
        "field": {"kind": "rational"},
        "weight": "0",
        "algebra": {"dim": 1, "unital": True, "unit": ["1"], "mult": [[["1"]]]},
        "derivation": [["0"]],
    }
    doc.update(overrides)
    return doc


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class TestParse:
    def test_minimal_document(self):
        problem = parse_problem(minimal())
        assert problem.algebra.dim == 1
        assert problem.algebra.unital
        assert problem.module is None
        assert problem.name == ""

    def test_module_defaults_to_regular(self):
        problem = parse_problem(minimal())
        V = problem.bimodule
        assert V.dim == 1
        assert V.left.tolist() == [[[1]]]

    def test_scalars_are_canonicalized(self):
        problem = parse_problem(minimal(weight="-2/4"))
        assert problem.weight == Fraction(-1, 2)
        assert serialize_problem(problem)["weight"] == "-1/2"

    def test_integers_are_accepted(self):
        doc = minimal(derivation=[[0]])
        doc["algebra"]["mult"] = [[[1]]]
        assert parse_problem(doc).algebra.mult.tolist() == [[[1]]]

    def test_float_rejected_with_location(self):
        doc = minimal()
        doc["algebra"]["mult"] = [[[1.0]]]
        with pytest.raises(ProblemFileError) as exc:
            parse_problem(doc)
        assert exc.value.location == "$.algebra.mult[0][0][0]"

    def test_wrong_length_reports_list(self):
        doc = minimal(derivation=[["0", "0"]])
        with pytest.raises(ProblemFileError) as exc:
            parse_problem(doc)
        assert exc.value.location == "$.derivation[0]"

    def test_missing_key(self):
        doc = minimal()
        del doc["derivation"]
        with pytest.raises(ProblemFileError, match="derivation"):
            parse_problem(doc)

    def test_unknown_key(self):
        with pytest.raises(ProblemFileError) as exc:
            parse_problem(minimal(extra=1))
        assert exc.value.location == "$.extra"

    def test_unsupported_schema(self):
        with pytest.raises(ProblemFileError) as exc:
            parse_problem(minimal(schema=2))
        assert exc.value.location == "$.schema"

    @pytest.mark.parametrize(
        "field_doc, location",
        [
            ({"kind": "prime", "p": 4}, "$.field.p"),
            ({"kind": "prime"}, "$.field.p"),
            ({"kind": "real"}, "$.field.kind"),
        ],
    )
    def test_bad_field(self, field_doc, location):
        with pytest.raises(ProblemFileError) as exc:
            parse_problem(minimal(field=field_doc))
        assert exc.value.location == location

    @pytest.mark.parametrize("key", ["sections", "deformations", "gauges"])
    def test_named_blocks_must_be_objects(self, key):
        with pytest.raises(ProblemFileError, match="must be an object") as exc:
            parse_problem(minimal(**{key: []}))
        assert exc.value.location == f"$.{key}"

    def test_prime_field_reduces_scalars(self):
        problem = parse_problem(minimal(field={"kind": "prime", "p": 7}, weight="1/2"))
        assert problem.weight == 4
        assert problem.field.name == "GF(7)"

    def test_unit_without_unital_flag(self):
        doc = minimal()
        doc["algebra"]["unital"] = False
        with pytest.raises(ProblemFileError) as exc:
            parse_problem(doc)
        assert exc.value.location == "$.algebra.unit"

    def test_explicit_module(self):
        zero = [["0", "0"], ["0", "0"]]
        module = {"dim": 2, "left": [zero], "right": [zero], "dV": zero}
        problem = parse_problem(minimal(module=module))
        assert problem.bimodule.dim == 2
        assert problem.context.m == 2

    def test_cochain_operator_part_defaults_to_zero(self):
        problem = parse_problem(minimal(cochains={"c": {"degree": 1, "f": [["1"]]}}))
        c = problem.cochain("c")
        assert c.degree == 1
        assert c.g.is_zero()

    def test_degree_zero_cochain_rejects_operator_part(self):
        doc = minimal(cochains={"c": {"degree": 0, "f": ["1"], "g": ["1"]}})
        with pytest.raises(ProblemFileError) as exc:
            parse_problem(doc)
        assert exc.value.location == "$.cochains.c.g"

    def test_gauges(self):
        problem = parse_problem(minimal(gauges={"shift": {"phi": [[["1"]], [["3"]]]}}))
        G = problem.gauge("shift")
        assert G.order == 1
        assert G.phi[1].tolist() == [[3]]

    def test_series_lengths_must_agree(self):
        doc = minimal(deformations={"bad": {"mu": [[[["1"]]]], "d": [[["0"]], [["0"]]]}})
        with pytest.raises(ProblemFileError) as exc:
            parse_problem(doc)
        assert exc.value.location == "$.deformations.bad"

    def test_extension_base_dim_bounds(self):
        with pytest.raises(ProblemFileError) as exc:
            parse_problem(minimal(extension={"base_dim": 2}))
        assert exc.value.location == "$.extension.base_dim"

    def test_unknown_names_list_alternatives(self, flat):
        with pytest.raises(InvalidInputError, match="nonexact"):
            flat.cochain("missing")
        with pytest.raises(InvalidInputError, match="none"):
            flat.section("missing")


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


class TestFiles:
    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ProblemFileError, match="invalid JSON"):
            load_problem(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidInputError, match="cannot read"):
            load_problem(tmp_path / "absent.json")

    def test_prime_override(self):
        problem = load_problem(corpus_path("dual_numbers_weighted"), prime=7)
        assert problem.field.is_prime_field
        # -2/3 = -2 * 5 = 4 mod 7
        assert problem.weight == 4

    def test_serialize_minimal_document(self):
        out = serialize_problem(parse_problem(minimal(weight="3/6")))
        assert out["weight"] == "1/2"
        assert out["algebra"] == {"dim": 1, "unital": True, "mult": [[["1"]]], "unit": ["1"]}
        assert out["derivation"] == [["0"]]
        assert "module" not in out

    def test_named_data_survives_a_save(self, tmp_path):
        doc = minimal(
            cochains={"c": {"degree": 1, "f": [["1/3"]], "g": ["-2"]}},
            sections={"s": [["5/4"]]},
            deformations={"d": {"mu": [[[["1"]]], [[["1/2"]]]], "d": [[["0"]], [["-1"]]]}},
            gauges={"shift": {"phi": [[["1"]], [["3"]]]}},
        )
        path = save_problem(parse_problem(doc), tmp_path / "named.json")
        written = json.loads(path.read_text())
        assert written["cochains"]["c"] == {"degree": 1, "f": [["1/3"]], "g": ["-2"]}
        assert written["sections"] == {"s": [["5/4"]]}
        assert written["deformations"]["d"]["mu"] == [[[["1"]]], [[["1/2"]]]]
        assert written["gauges"]["shift"]["phi"] == [[["1"]], [["3"]]]
        again = load_problem(path)
        assert again.cochain("c").f.coeffs.tolist() == [[Fraction(1, 3)]]
        assert again.gauge("shift").phi[1].tolist() == [[3]]

    def test_save_and_reload(self, tmp_path, flat):
        path = save_problem(flat, tmp_path / "sub" / "flat.json")
        again = load_problem(path)
        assert serialize_problem(again) == serialize_problem(flat)
        assert path.read_text().endswith("\n")

    def test_saved_text_is_stable(self, flat):
        text = to_json(serialize_problem(flat))
        assert text == to_json(json.loads(text))
        assert list(json.loads(text)) == sorted(json.loads(text))

    def test_corpus_files_are_canonical(self, corpus_problem):
        path = corpus_path(corpus_problem.name)
        assert serialize_problem(corpus_problem) == serialize_problem(load_problem(path))
        assert json.loads(path.read_text())["name"] == path.stem


# ---------------------------------------------------------------------------
# Bundled problems
# ---------------------------------------------------------------------------


class TestCorpus:
    def test_discovered_names(self):
        assert "ground_field" in CORPUS_NAMES
        assert CORPUS_NAMES == sorted(CORPUS_NAMES)

    def test_override_directory(self, tmp_path):
        (tmp_path / "b.json").write_text(json.dumps(minimal()))
        (tmp_path / "a.json").write_text(json.dumps(minimal()))
        (tmp_path / "notes.txt").write_text("ignored")
        assert [name for name, _ in discover_corpus(tmp_path)] == ["a", "b"]
        assert load_corpus_problem("a", tmp_path).algebra.dim == 1

    def test_missing_directory(self, tmp_path):
        assert discover_corpus(tmp_path / "absent") == []

    def test_unknown_name(self):
        with pytest.raises(InvalidInputError, match="ground_field"):
            corpus_path("nope")

    def test_resolve_path_or_name(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps(minimal()))
        assert resolve_problem_path(str(path)) == path
        assert resolve_problem_path("ground_field") == corpus_path("ground_field")
        with pytest.raises(InvalidInputError):
            resolve_problem_path(str(tmp_path / "missing.json"))
