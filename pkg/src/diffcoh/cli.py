"""diffcoh CLI — cohomology of weighted differential algebras."""

from __future__ import annotations

import functools
import logging
import sys
from pathlib import Path

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from diffcoh.algebra import (
    canonical_projection,
    canonical_section,
    quotient_algebra,
    validate_diff_algebra,
    validate_diff_bimodule,
)
from diffcoh.cochains import cocycle_conditions, diff_d
from diffcoh.complexes import ComplexKind, cohomology_dims
from diffcoh.config import (
    CONFIG_FILENAME,
    DEFAULT_CONFIG_TEMPLATE,
    DiffcohConfig,
    load_config,
    merge_cli_overrides,
)
from diffcoh.corpus import discover_corpus, resolve_problem_path
from diffcoh.deformations import (
    apply_gauge,
    check_deformation,
    deformation_from_cocycle,
    trivialize,
)
from diffcoh.errors import (
    BudgetExceededError,
    InternalConsistencyError,
    InvalidInputError,
    UnsupportedOperationError,
)
from diffcoh.extensions import (
    TwoCocycle,
    build_extension,
    cocycle_violations,
    cocycles_equivalent,
    extract_cocycle,
    is_cocycle,
    normalize_extension,
)
from diffcoh.problem import ProblemFile, load_problem, save_problem
from diffcoh.report import REPORT_FORMATS, render

console = Console()
err_console = Console(stderr=True)

VERBOSITY_QUIET = 0
VERBOSITY_NORMAL = 1
VERBOSITY_VERBOSE = 2

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3

_verbosity: int = VERBOSITY_NORMAL


def _info(msg: str) -> None:
    """Print a message at normal verbosity or above."""
    if _verbosity >= VERBOSITY_NORMAL:
        err_console.print(msg)


def _detail(msg: str) -> None:
    """Print a message only in verbose mode."""
    if _verbosity >= VERBOSITY_VERBOSE:
        err_console.print(msg)


def _load_cfg() -> DiffcohConfig:
    """Load the project config, printing a note if a file is found."""
    cfg = load_config()
    if cfg.config_path:
        _detail(f"  [dim]Config: {cfg.config_path}[/dim]")
    return cfg


def _load(target: str, prime: int | None = None) -> ProblemFile:
    path = resolve_problem_path(target)
    _detail(f"  [dim]Problem: {path}[/dim]")
    return load_problem(path, prime=prime)


def _emit(data: dict, kind: str, fmt: str) -> None:
    """Write a report to stdout; JSON goes out byte for byte."""
    rendered = render(data, kind, fmt)
    if isinstance(rendered, Table):
        console.print(rendered)
    else:
        click.echo(rendered, nl=False)


def _finish(passed: bool) -> None:
    if not passed:
        sys.exit(EXIT_FAIL)


def _handle_errors(func):
    """Map library exceptions onto exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except BudgetExceededError as e:
            err_console.print(f"[red]Budget exceeded:[/red] {escape(str(e))}")
            err_console.print(
                f"[dim]Raise the limits in {CONFIG_FILENAME} or on the command line.[/dim]"
            )
            sys.exit(EXIT_BUDGET)
        except (InvalidInputError, UnsupportedOperationError) as e:
            err_console.print(f"[red]Error:[/red] {escape(str(e))}")
            witness = getattr(e, "witness", None)
            if witness is not None:
                err_console.print(f"  witness: {tuple(witness)}")
            sys.exit(EXIT_INPUT)

    return wrapper


_format_option = click.option(
    "--format",
    "fmt",
    type=click.Choice(REPORT_FORMATS),
    default=None,
    help="Output format (default: from config or json).",
)


# ---------------------------------------------------------------------------
# CLI group
# ---------------------------------------------------------------------------


@click.group()
@click.version_option(package_name="diffcoh")
@click.option("--quiet", "-q", is_flag=True, help="Minimal output — reports and errors only.")
@click.option("--verbose", "-V", is_flag=True, help="Extra diagnostic output and debug logging.")
@click.pass_context
def main(ctx: click.Context, quiet: bool, verbose: bool):
    """diffcoh — cohomology, extensions and deformations of weighted differential algebras.

    PROBLEM arguments take a JSON problem file or the name of a bundled
    example (see ``diffcoh corpus``).
    """
    global _verbosity
    if quiet:
        _verbosity = VERBOSITY_QUIET
    elif verbose:
        _verbosity = VERBOSITY_VERBOSE
    else:
        _verbosity = VERBOSITY_NORMAL

    if _verbosity >= VERBOSITY_VERBOSE:
        logger = logging.getLogger("diffcoh")
        if not any(isinstance(h, RichHandler) for h in logger.handlers):
            logger.addHandler(RichHandler(console=err_console, show_path=False))
        logger.setLevel(logging.DEBUG)

    ctx.ensure_object(dict)
    ctx.obj["verbosity"] = _verbosity


# ---------------------------------------------------------------------------
# init / corpus commands
# ---------------------------------------------------------------------------


@main.command()
@click.option("--force", is_flag=True, help="Overwrite existing config file.")
def init(force: bool):
    """Create a default diffcoh.toml configuration file.

    Examples:

        diffcoh init

        diffcoh init --force
    """
    target = Path.cwd() / CONFIG_FILENAME
    if target.exists() and not force:
        console.print(f"[yellow]{CONFIG_FILENAME} already exists.[/yellow]")
        console.print("[dim]Use --force to overwrite.[/dim]")
        return

    target.write_text(DEFAULT_CONFIG_TEMPLATE)
    console.print(f"[green]✓[/green] Created {CONFIG_FILENAME}")
    _info("[dim]Edit the file to change budgets, deformation order and report format.[/dim]")


@main.command(name="corpus")
@_handle_errors
def list_corpus():
    """List the bundled example problems."""
    problems = discover_corpus()
    if not problems:
        console.print("[yellow]No bundled problems found.[/yellow]")
        return

    table = Table(title="Bundled Problems")
    table.add_column("Name", style="bold")
    table.add_column("dim A", justify="right")
    table.add_column("Weight", justify="right", style="cyan")
    table.add_column("Unital")
    table.add_column("Description", style="dim")

    for name, path in problems:
        problem = load_problem(path)
        A = problem.algebra
        table.add_row(
            name,
            str(A.dim),
            A.field.format(A.weight),
            "yes" if A.unital else "no",
            problem.description,
        )

    console.print(table)


# ---------------------------------------------------------------------------
# validate command
# ---------------------------------------------------------------------------


@main.command()
@click.argument("problem")
@_format_option
@_handle_errors
def validate(problem: str, fmt: str | None):
    """Check the algebra and bimodule axioms; exit 0 iff all hold."""
    cfg = merge_cli_overrides(_load_cfg(), fmt=fmt)
    prob = _load(problem)
    reports = [validate_diff_algebra(prob.algebra)]
    reports.append(validate_diff_bimodule(prob.algebra, prob.bimodule))
    passed = all(r.passed for r in reports)

    if cfg.report_format == "json":
        data = {"passed": passed, "reports": [r.to_dict() for r in reports]}
        _emit(data, "validation_summary", "json")
    else:
        for r in reports:
            _emit(r.to_dict(), "validation", cfg.report_format)
    _finish(passed)


# ---------------------------------------------------------------------------
# cohomology command
# ---------------------------------------------------------------------------


@main.command()
@click.argument("problem")
@click.option(
    "--max-degree", "-n", type=int, default=None, help="Top degree of the window (default: budget)."
)
@click.option("--degree-budget", type=int, default=None, help="Highest degree allowed.")
@click.option("--reduced", is_flag=True, help="Also compute the reduced combined cohomology.")
@click.option("--representatives", is_flag=True, help="Include cocycle representatives.")
@click.option("--les", is_flag=True, help="Check exactness of the long exact sequence.")
@click.option("--prime", type=int, default=None, help="Compute over GF(PRIME) (heuristic).")
@click.option("--max-columns", type=int, default=None, help="Largest cochain space allowed.")
@click.option(
    "--cross-check-delta/--no-cross-check-delta",
    default=None,
    help="Compare both operator-coboundary implementations on every evaluation.",
)
@_format_option
@_handle_errors
def cohomology(
    problem: str,
    max_degree: int | None,
    degree_budget: int | None,
    reduced: bool,
    representatives: bool,
    les: bool,
    prime: int | None,
    max_columns: int | None,
    cross_check_delta: bool | None,
    fmt: str | None,
):
    """Dimensions of HH, H_do and H_Diff in degrees 0..N."""
    cfg = merge_cli_overrides(
        _load_cfg(),
        max_degree=degree_budget,
        max_columns=max_columns,
        cross_check_delta=cross_check_delta,
        fmt=fmt,
    )
    prob = _load(problem, prime=prime)
    context = prob.make_context(cfg.budget, cfg.cross_check_delta)
    kinds = [ComplexKind.ALG, ComplexKind.DO, ComplexKind.DIFF]
    if reduced:
        kinds.append(ComplexKind.DIFF_REDUCED)

    window = cfg.max_degree if max_degree is None else max_degree
    _detail(f"  [dim]Window 0..{window} over {context.field.name}[/dim]")
    report = cohomology_dims(context, window, tuple(kinds), les=les)
    _emit(report.to_dict(representatives=representatives), "cohomology", cfg.report_format)
    _finish(report.les is None or report.les.exact)


# ---------------------------------------------------------------------------
# cocycle commands
# ---------------------------------------------------------------------------


@main.command(name="cocycle-check")
@click.argument("problem")
@click.option("--cochain", "name", required=True, help="Named cochain in the problem file.")
@_format_option
@_handle_errors
def cocycle_check(problem: str, name: str, fmt: str | None):
    """Decide whether a named pair (f, g) is a cocycle, with witnesses."""
    cfg = merge_cli_overrides(_load_cfg(), fmt=fmt)
    prob = _load(problem)
    context = prob.make_context(cfg.budget, cfg.cross_check_delta)
    c = prob.cochain(name, context)
    report = cocycle_conditions(c)
    if report.passed != diff_d(c).is_zero():
        raise InternalConsistencyError("cocycle identities disagree with the coboundary")

    data = {"cochain": name, "degree": c.degree, "cocycle": report.passed}
    data["violations"] = [v.to_dict() for v in report.violations]
    _emit(data, "cocycle_check", cfg.report_format)
    _finish(report.passed)


def _two_cocycle(prob: ProblemFile, name: str, context) -> TwoCocycle:
    c = prob.cochain(name, context)
    if c.degree != 2:
        raise InvalidInputError(f"cochain {name!r} has degree {c.degree}, expected 2")
    return TwoCocycle.from_diff_cochain(c)


@main.command()
@click.argument("problem")
@click.option("--cocycle", "name", required=True, help="Named degree-2 cochain.")
@click.option("--output", "-o", type=click.Path(path_type=Path), required=True)
@_format_option
@_handle_errors
def extend(problem: str, name: str, output: Path, fmt: str | None):
    """Write the abelian extension defined by a 2-cocycle as a new problem file."""
    cfg = merge_cli_overrides(_load_cfg(), fmt=fmt)
    prob = _load(problem)
    context = prob.make_context(cfg.budget, cfg.cross_check_delta)
    c = _two_cocycle(prob, name, context)

    violations = cocycle_violations(c)
    if not violations.passed:
        data = {"cocycle": name, "extended": False, **violations.to_dict()}
        _emit(data, "extension", cfg.report_format)
        _finish(False)

    E = build_extension(c)
    stem = prob.name or Path(problem).stem
    written = save_problem(
        ProblemFile(
            E.total,
            name=f"{stem}_by_{name}",
            description=f"Abelian extension of {stem} by the 2-cocycle {name}.",
            sections={"canonical": E.section.entries},
            extension_base_dim=E.base_dim,
        ),
        output,
    )
    _detail(f"  [dim]Extension written → {written}[/dim]")
    data = {
        "cocycle": name,
        "extended": True,
        "output": str(written),
        "dim": E.total.dim,
        "base_dim": E.base_dim,
        "module_dim": E.module_dim,
    }
    _emit(data, "extension", cfg.report_format)


@main.command(name="extract-cocycle")
@click.argument("problem")
@click.option("--section", "section_name", default=None, help="Named section (default: canonical).")
@_format_option
@_handle_errors
def extract_cocycle_cmd(problem: str, section_name: str | None, fmt: str | None):
    """Recover (psi, chi) from an extension file through a section."""
    cfg = merge_cli_overrides(_load_cfg(), fmt=fmt)
    prob = _load(problem)
    if prob.extension_base_dim is None:
        raise InvalidInputError("problem has no extension block")

    total = prob.algebra
    f = total.field
    n = prob.extension_base_dim
    projection = canonical_projection(f, n, total.dim - n)
    canonical = canonical_section(f, n, total.dim - n)
    base = quotient_algebra(total, projection, canonical)
    E = normalize_extension(total, base, projection, canonical)
    section = canonical if section_name is None else prob.section(section_name)
    c = extract_cocycle(E, section)

    fmt_ = f.format
    data = {
        "section": section_name or "canonical",
        "base_dim": E.base_dim,
        "module_dim": E.module_dim,
        "cocycle": is_cocycle(c),
        "psi": [fmt_(x) for x in c.psi.vector()],
        "chi": [fmt_(x) for x in c.chi.vector()],
    }
    _emit(data, "extracted_cocycle", cfg.report_format)
    _finish(data["cocycle"])


@main.command()
@click.argument("problem")
@click.option("--c1", "first", required=True, help="First named 2-cocycle.")
@click.option("--c2", "second", required=True, help="Second named 2-cocycle.")
@_format_option
@_handle_errors
def equivalent(problem: str, first: str, second: str, fmt: str | None):
    """Find phi with c1 - c2 = d_Diff(phi), or report the cocycles inequivalent."""
    cfg = merge_cli_overrides(_load_cfg(), fmt=fmt)
    prob = _load(problem)
    context = prob.make_context(cfg.budget, cfg.cross_check_delta)
    c1 = _two_cocycle(prob, first, context)
    c2 = _two_cocycle(prob, second, context)
    for label, c in ((first, c1), (second, c2)):
        report = cocycle_violations(c)
        if not report.passed:
            raise InvalidInputError(
                f"{label} is not a 2-cocycle", witness=report.violations[0].indices
            )

    phi = cocycles_equivalent(c1, c2)
    if phi is None:
        data = {"c1": first, "c2": second, "equivalent": False, "result": "inequivalent"}
    else:
        fmt_ = context.field.format
        data = {
            "c1": first,
            "c2": second,
            "equivalent": True,
            "phi": [[fmt_(x) for x in row] for row in phi.to_matrix().entries],
        }
    _emit(data, "equivalence", cfg.report_format)
    _finish(phi is not None)


# ---------------------------------------------------------------------------
# deformation commands
# ---------------------------------------------------------------------------


@main.command(name="deform-check")
@click.argument("problem")
@click.option("--deformation", "name", required=True, help="Named deformation.")
@_format_option
@_handle_errors
def deform_check(problem: str, name: str, fmt: str | None):
    """Check the deformation equations order by order."""
    cfg = merge_cli_overrides(_load_cfg(), fmt=fmt)
    prob = _load(problem)
    result = check_deformation(prob.deformation(name))
    _emit(result.to_dict(), "deformation", cfg.report_format)
    _finish(result.passed)


@main.command(name="trivialize")
@click.argument("problem")
@click.option("--deformation", "name", required=True, help="Named deformation.")
@_format_option
@_handle_errors
def trivialize_cmd(problem: str, name: str, fmt: str | None):
    """Gauge a deformation to the trivial one, or report the obstruction class."""
    cfg = merge_cli_overrides(_load_cfg(), fmt=fmt)
    prob = _load(problem)
    result = trivialize(prob.deformation(name))
    _emit({"deformation": name, **result.to_dict()}, "trivialization", cfg.report_format)
    _finish(result.succeeded)


@main.command(name="deform-seed")
@click.argument("problem")
@click.option("--cocycle", "name", required=True, help="Named degree-2 cochain.")
@click.option("--order", type=int, default=None, help="Truncation order (default: from config).")
@click.option("--output", "-o", type=click.Path(path_type=Path), required=True)
@_handle_errors
def deform_seed(problem: str, name: str, order: int | None, output: Path):
    """Add the deformation mu_A + t f, d_A + t g seeded by a 2-cocycle (f, g)."""
    cfg = merge_cli_overrides(_load_cfg(), deformation_order=order)
    prob = _load(problem)
    if prob.module is not None:
        raise InvalidInputError("deformations need cochains in the regular bimodule")
    c = prob.cochain(name)
    D = deformation_from_cocycle(prob.algebra, c, cfg.deformation_order)
    prob.deformations[name] = (D.mu, D.d)
    written = save_problem(prob, output)

    check = check_deformation(D)
    _detail(f"  [dim]Deformation written → {written}[/dim]")
    data = {"deformation": name, "output": str(written), **check.to_dict()}
    _emit(data, "deformation_seed", "json")


@main.command(name="apply-gauge")
@click.argument("problem")
@click.option("--deformation", "name", required=True, help="Named deformation.")
@click.option("--gauge", "gauge_name", required=True, help="Named gauge of the same order.")
@click.option("--output", "-o", type=click.Path(path_type=Path), required=True)
@_handle_errors
def apply_gauge_cmd(problem: str, name: str, gauge_name: str, output: Path):
    """Save the deformation Phi^-1 o mu o (Phi x Phi), Phi^-1 o d o Phi as NAME_GAUGE."""
    prob = _load(problem)
    D = apply_gauge(prob.deformation(name), prob.gauge(gauge_name))
    gauged = f"{name}_{gauge_name}"
    prob.deformations[gauged] = (D.mu, D.d)
    written = save_problem(prob, output)

    check = check_deformation(D)
    _detail(f"  [dim]Gauged deformation written → {written}[/dim]")
    data = {"deformation": gauged, "output": str(written), **check.to_dict()}
    _emit(data, "deformation_seed", "json")
    _finish(check.passed)
