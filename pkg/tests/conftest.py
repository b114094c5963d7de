"""Shared fixtures: bundled problems, contexts and random cochain helpers."""

import numpy as np
import pytest

from diffcoh.algebra import DiffAlgebra
from diffcoh.cochains import CochainContext
from diffcoh.corpus import discover_corpus, load_corpus_problem
from diffcoh.linalg import QQ

CORPUS_NAMES = [name for name, _ in discover_corpus()]

# Problems small enough for degree-3 assemblies in every test.
SMALL = [
    "ground_field",
    "ground_field_trivial_module",
    "dual_numbers",
    "dual_numbers_weighted",
    "dual_numbers_flat",
    "swap_difference",
    "nonunital_truncated",
]

WEIGHTED = [
    "dual_numbers_weighted",
    "swap_difference",
    "cyclic_difference",
    "matrix_inner",
    "nonunital_truncated",
]

BIG_PRIME = 1_000_000_007


def context_of(name: str) -> CochainContext:
    return load_corpus_problem(name).context


def integer_matrix(rng: np.random.Generator, rows: int, cols: int, bound: int = 3) -> np.ndarray:
    return QQ.array(rng.integers(-bound, bound + 1, size=(rows, cols)))


def dual_numbers_algebra(derivation=((0, 0), (0, 0)), weight=0) -> DiffAlgebra:
    """k[x]/(x^2) on {1, x} with the given derivation matrix."""
    mult = [[[1, 0], [0, 1]], [[0, 1], [0, 0]]]
    return DiffAlgebra.build(QQ, mult, derivation, weight, [1, 0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=CORPUS_NAMES)
def corpus_problem(request):
    return load_corpus_problem(request.param)


@pytest.fixture(params=SMALL)
def small_context(request):
    return context_of(request.param)


@pytest.fixture
def flat():
    return load_corpus_problem("dual_numbers_flat")


@pytest.fixture
def ground():
    return load_corpus_problem("ground_field")
