"""Bundled example problems shipped as package data."""

from __future__ import annotations

import logging
from pathlib import Path

from diffcoh.errors import InvalidInputError
from diffcoh.problem import ProblemFile, load_problem

log = logging.getLogger(__name__)

CORPUS_DIR = Path(__file__).parent / "corpus"


def discover_corpus(corpus_dir: Path | None = None) -> list[tuple[str, Path]]:
    """List bundled problems.

    Args:
        corpus_dir: Override the corpus directory (useful for tests).

    Returns:
        Sorted list of (name, path) tuples; the name is the file stem.
    """
    root = corpus_dir or CORPUS_DIR
    if not root.is_dir():
        log.warning("corpus directory %s not found", root)
        return []
    return [(p.stem, p) for p in sorted(root.glob("*.json"))]


def corpus_path(name: str, corpus_dir: Path | None = None) -> Path:
    for stem, path in discover_corpus(corpus_dir):
        if stem == name:
            return path
    known = ", ".join(stem for stem, _ in discover_corpus(corpus_dir))
    raise InvalidInputError(f"no bundled problem named {name!r} (available: {known})")


def load_corpus_problem(name: str, corpus_dir: Path | None = None) -> ProblemFile:
    """Parse the bundled problem *name*."""
    return load_problem(corpus_path(name, corpus_dir))


def resolve_problem_path(target: str) -> Path:
    """A path on disk, or the name of a bundled problem."""
    path = Path(target)
    if path.exists():
        return path
    if path.suffix == "" and path.parent == Path("."):
        return corpus_path(target)
    raise InvalidInputError(f"{target}: no such file")
