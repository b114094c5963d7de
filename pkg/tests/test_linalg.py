"""Tests for exact scalars, matrices and elimination."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diffcoh.errors import InvalidInputError
from diffcoh.linalg import (
    QQ,
    Field,
    Matrix,
    _eliminate,
    column_space_representatives,
    inverse,
    kernel_basis,
    pivot_columns,
    rank,
    rref,
    solve,
)
from tests.conftest import BIG_PRIME, integer_matrix

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def m(rows, field=QQ):
    return Matrix.from_rows(field, rows)


def determinant(rows):
    """Leibniz formula, for cross-checking elimination on small matrices."""
    n = len(rows)
    total = 0
    for perm in itertools.permutations(range(n)):
        inversions = sum(perm[i] > perm[j] for i in range(n) for j in range(i + 1, n))
        term = -1 if inversions % 2 else 1
        for i, j in enumerate(perm):
            term *= rows[i][j]
        total += term
    return total


# ---------------------------------------------------------------------------
# Field scalars
# ---------------------------------------------------------------------------


class TestFieldScalars:
    def test_parse_reduces_to_lowest_terms(self):
        assert QQ.parse("-2/4") == Fraction(-1, 2)
        assert QQ.format(QQ.parse("-2/4")) == "-1/2"

    def test_integral_rationals_are_ints(self):
        value = QQ.parse("6/3")
        assert value == 2
        assert isinstance(value, int)

    def test_whitespace_is_ignored(self):
        assert QQ.parse(" 4 / 6 ") == Fraction(2, 3)

    @pytest.mark.parametrize("text", ["1.5", "1e3", "x", "1/0", ""])
    def test_unparsable_rationals_rejected(self, text):
        with pytest.raises(InvalidInputError):
            QQ.parse(text)

    def test_floats_rejected(self):
        with pytest.raises(InvalidInputError):
            QQ.scalar(0.5)

    def test_prime_field_residues(self):
        gf7 = Field.prime(7)
        assert gf7.scalar(Fraction(1, 2)) == 4
        assert gf7.scalar(-1) == 6
        assert gf7.parse("3/5") == 2

    def test_prime_field_rejects_denominator_p(self):
        with pytest.raises(InvalidInputError):
            Field.prime(7).scalar(Fraction(1, 7))

    def test_non_prime_characteristic_rejected(self):
        with pytest.raises(InvalidInputError):
            Field.prime(15)

    def test_inverse_and_power(self):
        assert QQ.inverse(Fraction(-2, 3)) == Fraction(-3, 2)
        assert Field.prime(11).inverse(3) == 4
        assert QQ.power(Fraction(-2, 3), 3) == Fraction(-8, 27)

    def test_inverse_of_zero_raises(self):
        with pytest.raises(ZeroDivisionError):
            QQ.inverse(0)

    def test_descriptor(self):
        assert QQ.descriptor() == {"kind": "rational"}
        assert Field.prime(5).descriptor() == {"kind": "prime", "p": 5}
        assert Field.prime(5).name == "GF(5)"

    def test_check_array_reports_index(self):
        arr = np.array([[1, 2], [0.5, 3]], dtype=object)
        with pytest.raises(InvalidInputError) as exc:
            QQ.check_array(arr)
        assert exc.value.witness == (1, 0)


# ---------------------------------------------------------------------------
# rank / rref
# ---------------------------------------------------------------------------


class TestRank:
    def test_identity(self):
        assert rank(Matrix.identity(QQ, 3)) == 3

    def test_zero_matrix(self):
        assert rank(Matrix.zeros(QQ, 2, 3)) == 0

    def test_dependent_rows(self):
        assert rank(m([[1, 2, 3], [2, 4, 6]])) == 1

    def test_rational_entries(self):
        assert rank(m([["1/2", "1/3"], ["3", "2"]])) == 1

    def test_empty_matrix(self):
        assert rank(Matrix.zeros(QQ, 3, 0)) == 0
        assert rank(Matrix.zeros(QQ, 0, 3)) == 0

    def test_rref_of_dependent_rows(self):
        reduced, pivots = rref(m([[1, 2, 3], [2, 4, 6]]))
        assert pivots == [0]
        assert reduced == m([[1, 2, 3]])

    def test_rref_normalizes_pivots(self):
        reduced, pivots = rref(m([[2, 4], [1, 3]]))
        assert pivots == [0, 1]
        assert reduced == Matrix.identity(QQ, 2)

    def test_rref_with_fractions(self):
        reduced, pivots = rref(m([[2, 1, 0], [0, 0, 3]]))
        assert pivots == [0, 2]
        assert reduced == m([[1, "1/2", 0], [0, 0, 1]])

    def test_pivot_columns(self):
        assert pivot_columns(m([[0, 1, 1], [0, 2, 2]])) == [1]

    @pytest.mark.parametrize(
        "rows, det",
        [([[2, 1, 3], [4, 5, 6], [7, 8, 10]], -3), ([[2, 1, 0], [0, 3, 1], [1, 0, 1]], 7)],
    )
    def test_last_pivot_is_the_determinant(self, rows, det):
        echelon, pivots = _eliminate(m(rows), reduced=False)
        assert pivots == [0, 1, 2]
        assert echelon[-1, -1] == det

    @given(seed=seeds)
    @settings(deadline=None, max_examples=60)
    def test_elimination_divisions_are_exact(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 5))
        M = m(rng.integers(-4, 5, size=(n, n)).tolist())
        echelon, pivots = _eliminate(M, reduced=False)
        det = determinant(M.entries.tolist())
        if det == 0:
            assert len(pivots) < n
        else:
            assert abs(echelon[-1, -1]) == abs(det)

    def test_entries_outside_the_field_are_rejected(self):
        gf = Field.prime(7)
        bad = Matrix(gf, np.array([[1, Fraction(1, 2)]], dtype=object))
        with pytest.raises(InvalidInputError, match="GF\\(7\\)"):
            rank(bad)
        with pytest.raises(InvalidInputError):
            kernel_basis(bad)
        with pytest.raises(InvalidInputError):
            rank(Matrix(QQ, np.array([[0.5]], dtype=object)))

    @given(seed=seeds)
    @settings(deadline=None, max_examples=40)
    def test_rank_of_transpose(self, seed):
        rng = np.random.default_rng(seed)
        rows, cols = rng.integers(1, 6, size=2)
        M = Matrix(QQ, integer_matrix(rng, rows, cols))
        assert rank(M) == rank(M.T)

    @given(seed=seeds)
    @settings(deadline=None, max_examples=40)
    def test_large_prime_agrees_with_rationals(self, seed):
        rng = np.random.default_rng(seed)
        rows, cols = rng.integers(1, 7, size=2)
        raw = rng.integers(-3, 4, size=(rows, cols))
        gf = Field.prime(BIG_PRIME)
        assert rank(Matrix(QQ, QQ.array(raw))) == rank(Matrix(gf, gf.array(raw)))


# ---------------------------------------------------------------------------
# kernel_basis / solve
# ---------------------------------------------------------------------------


class TestKernelAndSolve:
    def test_kernel_of_identity_is_empty(self):
        assert kernel_basis(Matrix.identity(QQ, 3)) == []

    def test_kernel_of_zero_is_standard_basis(self):
        basis = kernel_basis(Matrix.zeros(QQ, 2, 2))
        assert [list(v) for v in basis] == [[1, 0], [0, 1]]

    def test_kernel_free_variable_is_one(self):
        basis = kernel_basis(m([[1, 1]]))
        assert [list(v) for v in basis] == [[-1, 1]]

    def test_solve_identity(self):
        b = QQ.array([3, "-1/2", 0])
        assert list(solve(Matrix.identity(QQ, 3), b)) == list(b)

    def test_solve_sets_free_variables_to_zero(self):
        assert list(solve(m([[1, 1]]), QQ.array([2]))) == [2, 0]

    def test_solve_inconsistent(self):
        assert solve(m([[0]]), QQ.array([1])) is None

    def test_solve_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            solve(m([[1, 1]]), QQ.array([1, 2]))

    def test_solve_checks_the_right_hand_side(self):
        gf = Field.prime(5)
        with pytest.raises(InvalidInputError, match="does not belong"):
            solve(Matrix.identity(gf, 2), np.array([1, 9], dtype=object))

    @given(seed=seeds)
    @settings(deadline=None, max_examples=40)
    def test_kernel_dimension_and_membership(self, seed):
        rng = np.random.default_rng(seed)
        rows, cols = rng.integers(1, 6, size=2)
        M = Matrix(QQ, integer_matrix(rng, rows, cols))
        basis = kernel_basis(M)
        assert len(basis) == cols - rank(M)
        for v in basis:
            assert not np.any(M @ v != 0)

    @given(seed=seeds)
    @settings(deadline=None, max_examples=40)
    def test_solve_consistent_systems(self, seed):
        rng = np.random.default_rng(seed)
        rows, cols = rng.integers(1, 6, size=2)
        M = Matrix(QQ, integer_matrix(rng, rows, cols))
        b = M @ QQ.array(rng.integers(-3, 4, size=cols))
        x = solve(M, b)
        assert x is not None
        assert list(M @ x) == list(b)


# ---------------------------------------------------------------------------
# Matrix helpers
# ---------------------------------------------------------------------------


class TestMatrixHelpers:
    def test_inverse(self):
        assert inverse(m([[2, 1], [1, 1]])) == m([[1, -1], [-1, 2]])

    def test_inverse_of_singular_raises(self):
        with pytest.raises(InvalidInputError):
            inverse(m([[1, 2], [2, 4]]))

    def test_inverse_over_prime_field(self):
        gf = Field.prime(5)
        P = m([[2, 0], [0, 3]], gf)
        assert P @ inverse(P) == Matrix.identity(gf, 2)

    def test_hstack(self):
        stacked = Matrix.identity(QQ, 2).hstack(m([[5], [6]]))
        assert stacked == m([[1, 0, 5], [0, 1, 6]])

    def test_field_mismatch(self):
        with pytest.raises(InvalidInputError):
            Matrix.identity(QQ, 2) @ Matrix.identity(Field.prime(5), 2)

    def test_column_space_representatives(self):
        e = [QQ.array(v) for v in ([1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1])]
        assert column_space_representatives(QQ, [e[0]], e[1:], 3) == [0, 2]

    def test_column_space_representatives_without_image(self):
        e = [QQ.array(v) for v in ([1, 1], [2, 2], [0, 1])]
        assert column_space_representatives(QQ, [], e, 2) == [0, 2]
