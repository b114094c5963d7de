"""Tests for diffcoh CLI commands and exit codes."""

import json
import logging
from pathlib import Path

import pytest
from click.testing import CliRunner

from diffcoh.cli import EXIT_BUDGET, EXIT_FAIL, EXIT_INPUT, EXIT_OK, main
from diffcoh.corpus import corpus_path
from diffcoh.problem import load_problem


@pytest.fixture(autouse=True)
def quiet_logger():
    """``--verbose`` attaches a handler to the package logger; undo it after each test."""
    logger = logging.getLogger("diffcoh")
    handlers, level = list(logger.handlers), logger.level
    yield
    logger.handlers[:] = handlers
    logger.setLevel(level)


def run(*args):
    return CliRunner().invoke(main, list(args))


def run_json(*args, code=EXIT_OK):
    result = run(*args)
    assert result.exit_code == code, result.output
    return json.loads(result.output)


@pytest.fixture
def flat_with_zero(tmp_path) -> Path:
    """The flat dual-numbers problem plus the zero 2-cochain."""
    data = json.loads(corpus_path("dual_numbers_flat").read_text())
    zero = [[["0", "0"], ["0", "0"]], [["0", "0"], ["0", "0"]]]
    data["cochains"]["zero"] = {"degree": 2, "f": zero, "g": [["0", "0"], ["0", "0"]]}
    path = tmp_path / "flat.json"
    path.write_text(json.dumps(data))
    return path


# ---------------------------------------------------------------------------
# Verbosity flags
# ---------------------------------------------------------------------------


class TestVerbosityFlags:
    def test_quiet_flag_accepted(self):
        assert run("--quiet", "--help").exit_code == 0

    def test_verbose_flag_accepted(self):
        assert run("--verbose", "--help").exit_code == 0

    def test_version_flag(self):
        result = run("--version")
        assert result.exit_code == 0
        assert "diffcoh" in result.output.lower() or "version" in result.output.lower()

    def test_verbose_run(self):
        result = run("--verbose", "cohomology", "ground_field", "-n", "1")
        assert result.exit_code == 0


# ---------------------------------------------------------------------------
# init / corpus commands
# ---------------------------------------------------------------------------


class TestInitCommand:
    def test_creates_config_file(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            result = runner.invoke(main, ["init"])
            assert result.exit_code == 0
            assert "Created" in result.output
            assert Path("diffcoh.toml").exists()

    def test_refuses_overwrite_without_force(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            Path("diffcoh.toml").write_text("existing")
            result = runner.invoke(main, ["init"])
            assert result.exit_code == 0
            assert "already exists" in result.output
            assert Path("diffcoh.toml").read_text() == "existing"

    def test_force_overwrites(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            Path("diffcoh.toml").write_text("old content")
            result = runner.invoke(main, ["init", "--force"])
            assert result.exit_code == 0
            assert "[budget]" in Path("diffcoh.toml").read_text()

    def test_config_sets_default_format(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            Path("diffcoh.toml").write_text('[report]\nformat = "markdown"\n')
            result = runner.invoke(main, ["cohomology", "ground_field", "-n", "1"])
            assert result.exit_code == 0
            assert "# diffcoh Cohomology Report" in result.output


class TestCorpusCommand:
    def test_lists_problems(self):
        result = run("corpus")
        assert result.exit_code == 0
        assert "Bundled Problems" in result.output


# ---------------------------------------------------------------------------
# validate / cohomology
# ---------------------------------------------------------------------------


class TestValidate:
    def test_valid_problem(self):
        data = run_json("validate", "dual_numbers")
        assert data["passed"] is True
        assert [r["subject"] for r in data["reports"]] == ["algebra", "bimodule"]

    def test_invalid_problem_exits_1(self, tmp_path):
        doc = json.loads(corpus_path("dual_numbers").read_text())
        doc["derivation"] = [["1", "0"], ["0", "1"]]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        data = run_json("validate", str(path), code=EXIT_FAIL)
        assert data["passed"] is False

    def test_unknown_problem_exits_2(self):
        result = run("validate", "no_such_problem")
        assert result.exit_code == EXIT_INPUT
        assert "Error" in result.output

    def test_malformed_file_reports_location(self, tmp_path):
        doc = json.loads(corpus_path("ground_field").read_text())
        doc["weight"] = 0.5
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        result = run("validate", str(path))
        assert result.exit_code == EXIT_INPUT
        assert "$.weight" in result.output

    def test_markdown_format(self):
        result = run("validate", "swap_difference", "--format", "markdown")
        assert result.exit_code == 0
        assert "# diffcoh Validation" in result.output


class TestCohomologyCommand:
    def test_ground_field(self):
        data = run_json("cohomology", "ground_field", "-n", "2")
        assert data["dims"] == {"alg": [1, 0, 0], "do": [1, 0, 0], "diff": [1, 1, 0]}
        assert data["heuristic"] is False

    def test_reduced(self):
        data = run_json("cohomology", "dual_numbers_flat", "-n", "2", "--reduced")
        assert data["dims"]["diff_reduced"] == [0, 1, 2]

    def test_les(self):
        data = run_json("cohomology", "swap_difference", "-n", "2", "--les")
        assert data["les"]["exact"] is True

    def test_representatives(self):
        data = run_json("cohomology", "ground_field", "-n", "1", "--representatives")
        assert data["representatives"]["diff"][1] == [["0", "1"]]

    def test_prime_is_heuristic(self):
        data = run_json("cohomology", "matrix_inner", "-n", "1", "--prime", "1000000007")
        assert data["heuristic"] is True
        assert data["dims"]["diff"] == [1, 1]

    def test_cross_check(self):
        data = run_json("cohomology", "cyclic_difference", "-n", "1", "--cross-check-delta")
        assert data["dims"]["do"] == [3, 0]

    def test_budget_exceeded_exits_3(self):
        result = run("cohomology", "dual_numbers", "-n", "2", "--max-columns", "4")
        assert result.exit_code == EXIT_BUDGET
        assert "Budget exceeded" in result.output

    def test_window_above_budget_exits_3(self):
        result = run("cohomology", "ground_field", "-n", "5")
        assert result.exit_code == EXIT_BUDGET
        assert "max_degree 4" in result.output

    def test_degree_budget_is_separate_from_window(self):
        data = run_json("cohomology", "ground_field", "-n", "5", "--degree-budget", "5")
        assert data["dims"]["alg"] == [1, 0, 0, 0, 0, 0]

    def test_window_defaults_to_degree_budget(self):
        data = run_json("cohomology", "ground_field", "--degree-budget", "2")
        assert data["dims"]["diff"] == [1, 1, 0]

    def test_table_format(self):
        result = run("cohomology", "ground_field", "-n", "1", "--format", "table")
        assert result.exit_code == 0
        assert "H_Diff" in result.output


# ---------------------------------------------------------------------------
# cocycles and extensions
# ---------------------------------------------------------------------------


class TestCocycleCheck:
    def test_cocycle(self):
        data = run_json("cocycle-check", "dual_numbers_flat", "--cochain", "nonexact")
        assert data == {"cochain": "nonexact", "degree": 2, "cocycle": True, "violations": []}

    def test_non_cocycle_exits_1(self):
        data = run_json("cocycle-check", "dual_numbers_flat", "--cochain", "perturbed", code=1)
        assert data["cocycle"] is False
        assert {"identity": "operator cocycle", "indices": [0, 0]} in data["violations"]

    def test_unknown_cochain_exits_2(self):
        result = run("cocycle-check", "dual_numbers_flat", "--cochain", "missing")
        assert result.exit_code == EXIT_INPUT
        assert "nonexact" in result.output


class TestExtensions:
    def test_extend_and_extract(self, tmp_path):
        out = tmp_path / "ext.json"
        data = run_json("extend", "dual_numbers_flat", "--cocycle", "nonexact", "-o", str(out))
        assert data["extended"] is True
        assert data["dim"] == 4

        written = load_problem(out)
        assert written.extension_base_dim == 2
        assert "canonical" in written.sections

        extracted = run_json("extract-cocycle", str(out))
        assert extracted["cocycle"] is True
        assert extracted["psi"] == ["0", "0", "0", "0", "0", "0", "1", "0"]
        assert extracted["chi"] == ["0", "0", "0", "0"]

    def test_extract_through_named_section(self, tmp_path):
        out = tmp_path / "ext.json"
        run_json("extend", "dual_numbers_flat", "--cocycle", "nonexact", "-o", str(out))
        doc = json.loads(out.read_text())
        doc["sections"]["twisted"] = [["1", "0"], ["0", "1"], ["0", "1"], ["0", "0"]]
        out.write_text(json.dumps(doc))
        data = run_json("extract-cocycle", str(out), "--section", "twisted")
        assert data["section"] == "twisted"
        assert data["cocycle"] is True
        # x -> (x, 1) shifts psi(x, x) by 2x, as in the bundled "shifted" cochain
        assert data["psi"] == ["0", "0", "0", "0", "0", "0", "1", "2"]

    def test_extend_refuses_non_cocycle(self, tmp_path):
        out = tmp_path / "ext.json"
        data = run_json(
            "extend", "dual_numbers_flat", "--cocycle", "perturbed", "-o", str(out), code=1
        )
        assert data["extended"] is False
        assert not out.exists()

    def test_extract_needs_extension_block(self):
        result = run("extract-cocycle", "ground_field")
        assert result.exit_code == EXIT_INPUT

    def test_equivalent(self):
        data = run_json("equivalent", "dual_numbers_flat", "--c1", "nonexact", "--c2", "shifted")
        assert data["equivalent"] is True
        phi = data["phi"]
        assert (phi[0][0], phi[0][1], phi[1][0]) == ("0", "-1", "0")

    def test_inequivalent_exits_1(self, flat_with_zero):
        data = run_json(
            "equivalent", str(flat_with_zero), "--c1", "nonexact", "--c2", "zero", code=1
        )
        assert data["result"] == "inequivalent"

    def test_equivalent_rejects_non_cocycle(self):
        result = run("equivalent", "dual_numbers_flat", "--c1", "nonexact", "--c2", "perturbed")
        assert result.exit_code == EXIT_INPUT
        assert "witness" in result.output


# ---------------------------------------------------------------------------
# deformations
# ---------------------------------------------------------------------------


class TestDeformations:
    def test_deform_check(self):
        data = run_json("deform-check", "dual_numbers_flat", "--deformation", "square_root")
        assert data["passed"] is True
        assert data["valid_through"] == 2

    def test_trivialize_reports_obstruction(self):
        data = run_json(
            "trivialize", "dual_numbers_flat", "--deformation", "square_root", code=1
        )
        assert data["deformation"] == "square_root"
        assert data["obstruction_order"] == 1
        assert data["trivial_through_order"] == 0

    def test_deform_seed_round_trip(self, tmp_path):
        out = tmp_path / "seeded.json"
        data = run_json(
            "deform-seed", "dual_numbers_flat", "--cocycle", "nonexact", "--order", "2",
            "-o", str(out),
        )
        assert data["passed"] is True
        mu, d = load_problem(out).deformations["nonexact"]
        assert len(mu) == len(d) == 3
        run_json("trivialize", str(out), "--deformation", "nonexact", code=1)

    def test_deform_seed_needs_regular_module(self, tmp_path):
        result = run(
            "deform-seed", "ground_field_trivial_module", "--cocycle", "c",
            "-o", str(tmp_path / "x.json"),
        )
        assert result.exit_code == EXIT_INPUT

    def test_apply_gauge(self, tmp_path):
        doc = json.loads(corpus_path("dual_numbers_flat").read_text())
        phi = [[["1", "0"], ["0", "1"]], [["0", "0"], ["0", "1"]], [["0", "0"], ["0", "0"]]]
        doc["gauges"] = {"stretch": {"phi": phi}}
        source = tmp_path / "flat.json"
        source.write_text(json.dumps(doc))
        out = tmp_path / "gauged.json"
        data = run_json(
            "apply-gauge", str(source), "--deformation", "square_root", "--gauge", "stretch",
            "-o", str(out),
        )
        assert data["deformation"] == "square_root_stretch"
        assert data["passed"] is True

        mu, _ = load_problem(out).deformations["square_root_stretch"]
        # x -> x + t x turns mu_1(x, x) = 1 into an order-2 term 2
        assert mu[1][1][1].tolist() == [1, 0]
        assert mu[2][1][1].tolist() == [2, 0]
        result = run_json(
            "trivialize", str(out), "--deformation", "square_root_stretch", code=EXIT_FAIL
        )
        assert result["obstruction_order"] == 1

    def test_apply_gauge_needs_matching_order(self, tmp_path):
        doc = json.loads(corpus_path("dual_numbers_flat").read_text())
        doc["gauges"] = {"short": {"phi": [[["1", "0"], ["0", "1"]], [["0", "0"], ["0", "1"]]]}}
        source = tmp_path / "flat.json"
        source.write_text(json.dumps(doc))
        result = run(
            "apply-gauge", str(source), "--deformation", "square_root", "--gauge", "short",
            "-o", str(tmp_path / "out.json"),
        )
        assert result.exit_code == EXIT_INPUT
        assert "order 1" in result.output
