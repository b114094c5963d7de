"""Report rendering — JSON, Markdown and rich tables for command results.

Every command builds a plain dict first; this module only decides how that
dict is shown.  JSON output is canonical (sorted keys) so identical inputs
give byte-identical reports.
"""

from __future__ import annotations

import json

from rich.table import Table

from diffcoh.complexes import ComplexKind
from diffcoh.config import REPORT_FORMATS


def to_json(data: dict) -> str:
    """Canonical JSON text with a trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _verdict(passed: bool | None) -> str:
    if passed is None:
        return "-- unchecked"
    return "OK pass" if passed else "XX FAIL"


def _group_label(kind: str) -> str:
    try:
        return ComplexKind(kind).label
    except ValueError:
        return kind


def _field_name(descriptor: dict) -> str:
    if descriptor.get("kind") == "prime":
        return f"GF({descriptor['p']})"
    return "QQ"


# ---------------------------------------------------------------------------
# Markdown generation
# ---------------------------------------------------------------------------


def generate_cohomology_markdown(data: dict) -> str:
    """Generate a Markdown report for a cohomology computation.

    Args:
        data: Output of ``CohomologyReport.to_dict``.

    Returns:
        Markdown string.
    """
    top = data["max_degree"]
    lines: list[str] = []
    lines.append("# diffcoh Cohomology Report")
    lines.append("")
    lines.append(f"**Field:** {_field_name(data['field'])}")
    lines.append(f"**Weight:** {data['weight']}")
    lines.append(f"**Degrees:** 0..{top}")
    if data.get("heuristic"):
        lines.append("**Note:** computed over a prime field; dimensions are heuristic for QQ.")
    lines.append("")

    lines.append("## Dimensions")
    lines.append("")
    lines.append("| Group | " + " | ".join(f"n={n}" for n in range(top + 1)) + " |")
    lines.append("|-------|" + "|".join("----:" for _ in range(top + 1)) + "|")
    for kind, dims in data["dims"].items():
        lines.append(f"| {_group_label(kind)} | " + " | ".join(str(d) for d in dims) + " |")
    lines.append("")

    les = data.get("les")
    if les is not None:
        lines.append("## Long exact sequence")
        lines.append("")
        lines.append(f"**Exact in window:** {_verdict(les['exact'])}")
        lines.append(f"**Connecting map consistent:** {_verdict(les['connecting_consistent'])}")
        lines.append("")
        lines.append("| Node | dim | rank in | rank out | Status |")
        lines.append("|------|----:|--------:|---------:|--------|")
        for node in les["nodes"]:
            rank_out = "-" if node["rank_out"] is None else node["rank_out"]
            lines.append(
                f"| {node['group']}^{node['degree']} "
                f"| {node['dim']} "
                f"| {node['rank_in']} "
                f"| {rank_out} "
                f"| {_verdict(node['exact'])} |"
            )
        lines.append("")
    return "\n".join(lines)


def generate_validation_markdown(data: dict) -> str:
    """Markdown for an axiom check (``ValidationReport.to_dict``)."""
    lines = [f"# diffcoh Validation — {data['subject']}", ""]
    lines.append(f"**Result:** {_verdict(data['passed'])}")
    lines.append("")
    if data["violations"]:
        lines.append("| Identity | Indices |")
        lines.append("|----------|---------|")
        for v in data["violations"]:
            lines.append(f"| {v['identity']} | {tuple(v['indices'])} |")
        lines.append("")
    return "\n".join(lines)


def generate_deformation_markdown(data: dict) -> str:
    """Markdown for per-order deformation verdicts (``DeformationCheck.to_dict``)."""
    lines = ["# diffcoh Deformation Check", ""]
    lines.append(f"**Result:** {_verdict(data['passed'])}")
    lines.append(f"**Valid through order:** {data['valid_through']}")
    lines.append("")
    lines.append("| Order | Status | First violation |")
    lines.append("|------:|--------|-----------------|")
    for v in data["orders"]:
        first = v["violations"][0] if v["violations"] else None
        where = f"{first['identity']} at {tuple(first['indices'])}" if first else ""
        lines.append(f"| {v['order']} | {_verdict(v['passed'])} | {where} |")
    lines.append("")
    return "\n".join(lines)


def generate_summary_markdown(data: dict, title: str) -> str:
    """Key/value listing for results without a dedicated layout."""
    lines = [f"# diffcoh {title}", ""]
    for key, value in sorted(data.items()):
        lines.append(f"- **{key}:** `{json.dumps(value, sort_keys=True)}`")
    lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Rich tables
# ---------------------------------------------------------------------------


def cohomology_table(data: dict) -> Table:
    top = data["max_degree"]
    title = f"Cohomology over {_field_name(data['field'])}, weight {data['weight']}"
    if data.get("heuristic"):
        title += " (heuristic)"
    table = Table(title=title)
    table.add_column("Group", style="bold")
    for n in range(top + 1):
        table.add_column(f"n={n}", justify="right")
    for kind, dims in data["dims"].items():
        table.add_row(_group_label(kind), *(str(d) for d in dims))
    return table


def validation_table(data: dict) -> Table:
    status = "[green]pass[/green]" if data["passed"] else "[red]FAIL[/red]"
    table = Table(title=f"{data['subject']}: {status}")
    table.add_column("Identity")
    table.add_column("Indices", justify="right")
    for v in data["violations"]:
        table.add_row(v["identity"], str(tuple(v["indices"])))
    return table


def deformation_table(data: dict) -> Table:
    table = Table(title=f"Deformation valid through order {data['valid_through']}")
    table.add_column("Order", justify="right")
    table.add_column("Status")
    table.add_column("Violations", justify="right")
    for v in data["orders"]:
        status = "[green]pass[/green]" if v["passed"] else "[red]FAIL[/red]"
        table.add_row(str(v["order"]), status, str(len(v["violations"])))
    return table


def summary_table(data: dict, title: str) -> Table:
    table = Table(title=title)
    table.add_column("Key", style="bold")
    table.add_column("Value")
    for key, value in sorted(data.items()):
        table.add_row(key, json.dumps(value, sort_keys=True))
    return table


_MARKDOWN = {
    "cohomology": generate_cohomology_markdown,
    "validation": generate_validation_markdown,
    "deformation": generate_deformation_markdown,
}

_TABLES = {
    "cohomology": cohomology_table,
    "validation": validation_table,
    "deformation": deformation_table,
}


def render(data: dict, kind: str, fmt: str) -> str | Table:
    """Render *data* of report *kind* in *fmt* (one of ``REPORT_FORMATS``)."""
    if fmt == "json":
        return to_json(data)
    if fmt == "markdown":
        if kind in _MARKDOWN:
            return _MARKDOWN[kind](data)
        return generate_summary_markdown(data, kind.replace("_", " ").title())
    if fmt == "table":
        if kind in _TABLES:
            return _TABLES[kind](data)
        return summary_table(data, kind.replace("_", " ").title())
    raise ValueError(f"unknown report format {fmt!r}, expected one of {REPORT_FORMATS}")
