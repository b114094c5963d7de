"""Exact linear algebra over the rationals or a prime field.

Scalars are plain Python objects held in numpy ``object`` arrays: rationals
as ``int`` (when integral) or ``fractions.Fraction``, prime-field residues
as ``int`` in ``[0, p)``.  Nothing in this module ever produces a float.

Elimination is deterministic: columns are scanned left to right and the
first remaining row with a nonzero entry becomes the pivot.  Over the
rationals each row is first scaled to integers and elimination stays
fraction-free (cross multiplication followed by division by the row
content); fractions only appear when a reduced echelon form is normalized.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from diffcoh.errors import InvalidInputError

log = logging.getLogger(__name__)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    return all(p % k for k in range(3, math.isqrt(p) + 1, 2))


@dataclass(frozen=True)
class Field:
    """Ground field descriptor: the rationals (characteristic 0) or GF(p).

    Prime fields are an opt-in speed mode; results computed there are
    heuristic for the characteristic-zero theory and are labelled so.
    """

    characteristic: int = 0

    def __post_init__(self) -> None:
        if self.characteristic and not _is_prime(self.characteristic):
            raise InvalidInputError(f"{self.characteristic} is not a prime")

    @classmethod
    def rational(cls) -> Field:
        return cls(0)

    @classmethod
    def prime(cls, p: int) -> Field:
        return cls(int(p))

    @property
    def is_prime_field(self) -> bool:
        return self.characteristic != 0

    @property
    def name(self) -> str:
        return f"GF({self.characteristic})" if self.characteristic else "QQ"

    def descriptor(self) -> dict:
        """The JSON form used by problem files."""
        if self.characteristic:
            return {"kind": "prime", "p": self.characteristic}
        return {"kind": "rational"}

    # -- scalars -----------------------------------------------------------

    def scalar(self, value: Any) -> int | Fraction:
        """Coerce *value* into a canonical element of this field."""
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, (float, complex, np.floating)):
            raise InvalidInputError(f"inexact scalar {value!r}; use an integer or 'p/q' string")
        if isinstance(value, (bool, np.integer)):
            value = int(value)
        try:
            q = Fraction(value)
        except TypeError as e:
            raise InvalidInputError(f"not a scalar: {value!r}") from e
        if self.characteristic:
            p = self.characteristic
            if q.denominator % p == 0:
                raise InvalidInputError(f"{q} has no image in {self.name}")
            return q.numerator * pow(q.denominator, -1, p) % p
        return q.numerator if q.denominator == 1 else q

    def parse(self, text: str) -> int | Fraction:
        """Parse ``"3"``, ``"-2/3"`` or ``" 4 / 6 "`` exactly."""
        try:
            q = Fraction(text.replace(" ", ""))
        except (ValueError, ZeroDivisionError) as e:
            raise InvalidInputError(f"unparsable rational {text!r}") from e
        if "." in text or "e" in text.lower():
            raise InvalidInputError(f"unparsable rational {text!r}")
        return self.scalar(q)

    def format(self, value: int | Fraction) -> str:
        """Canonical string form: lowest terms, positive denominator."""
        q = Fraction(value)
        if q.denominator == 1:
            return str(q.numerator)
        return f"{q.numerator}/{q.denominator}"

    def inverse(self, value: int | Fraction) -> int | Fraction:
        if value == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.characteristic:
            return pow(int(value), -1, self.characteristic)
        return self.scalar(Fraction(1) / Fraction(value))

    def power(self, value: int | Fraction, exponent: int) -> int | Fraction:
        if self.characteristic:
            return pow(int(value), exponent, self.characteristic)
        return self.scalar(Fraction(value) ** exponent)

    # -- arrays ------------------------------------------------------------

    def array(self, data: Any) -> np.ndarray:
        """Build a canonical object array from nested lists or an array."""
        raw = np.asarray(data, dtype=object)
        out = np.empty(raw.shape, dtype=object)
        for index, value in np.ndenumerate(raw):
            out[index] = self.scalar(value)
        return out

    def zeros(self, shape: int | tuple[int, ...]) -> np.ndarray:
        return np.zeros(shape, dtype=object)

    def identity(self, n: int) -> np.ndarray:
        eye = np.zeros((n, n), dtype=object)
        for i in range(n):
            eye[i, i] = 1
        return eye

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        """Bring an array produced by ring operations back into canonical range."""
        if self.characteristic:
            return arr % self.characteristic
        return arr

    def check_array(self, arr: np.ndarray) -> None:
        """Raise if any entry does not belong to this field."""
        for index, value in np.ndenumerate(arr):
            if self.characteristic:
                ok = isinstance(value, int) and 0 <= value < self.characteristic
            else:
                ok = isinstance(value, (int, Fraction)) and not isinstance(value, bool)
            if not ok:
                raise InvalidInputError(
                    f"entry {value!r} at {index} does not belong to {self.name}",
                    witness=tuple(int(i) for i in index),
                )


QQ = Field.rational()


def is_zero(arr: np.ndarray) -> bool:
    """True if every entry of an exact array is zero."""
    return not np.any(arr != 0)


@dataclass(frozen=True, eq=False)
class Matrix:
    """Dense matrix of exact scalars sharing one field descriptor."""

    field: Field
    entries: np.ndarray

    @classmethod
    def from_rows(cls, field: Field, rows: Any, cols: int | None = None) -> Matrix:
        data = field.array(rows)
        if data.size == 0:
            data = field.zeros((len(rows) if hasattr(rows, "__len__") else 0, cols or 0))
        if data.ndim != 2:
            raise InvalidInputError(f"expected a 2-D matrix, got shape {data.shape}")
        return cls(field, data)

    @classmethod
    def identity(cls, field: Field, n: int) -> Matrix:
        return cls(field, field.identity(n))

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> Matrix:
        return cls(field, field.zeros((rows, cols)))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def T(self) -> Matrix:
        return Matrix(self.field, self.entries.T.copy())

    def column(self, j: int) -> np.ndarray:
        return self.entries[:, j].copy()

    def is_zero(self) -> bool:
        return is_zero(self.entries)

    def __matmul__(self, other: Matrix | np.ndarray) -> Matrix | np.ndarray:
        if isinstance(other, Matrix):
            _same_field(self, other)
            return Matrix(self.field, self.field.reduce(_dot(self.entries, other.entries)))
        if other.shape[0] != self.cols:
            raise InvalidInputError(f"cannot apply {self.shape} matrix to length {other.shape[0]}")
        return self.field.reduce(_dot(self.entries, other))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.field == other.field
            and self.shape == other.shape
            and bool(np.all(self.entries == other.entries))
        )

    def __hash__(self) -> int:
        return hash((self.field, self.shape))

    def hstack(self, *others: Matrix | np.ndarray) -> Matrix:
        blocks = [self.entries]
        for other in others:
            if isinstance(other, Matrix):
                _same_field(self, other)
                block = other.entries
            else:
                block = np.asarray(other, dtype=object).reshape(self.rows, -1)
            if block.shape[0] != self.rows:
                raise InvalidInputError("row counts differ in hstack")
            blocks.append(block)
        return Matrix(self.field, np.concatenate(blocks, axis=1))


def _same_field(a: Matrix, b: Matrix) -> None:
    if a.field != b.field:
        raise InvalidInputError(f"field mismatch: {a.field.name} vs {b.field.name}")


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] == 0:
        return np.zeros((a.shape[0],) + b.shape[1:], dtype=object)
    return np.dot(a, b)


# ---------------------------------------------------------------------------
# Elimination
# ---------------------------------------------------------------------------


def _integer_rows(entries: np.ndarray) -> np.ndarray:
    """Scale each rational row by the lcm of its denominators."""
    out = np.empty(entries.shape, dtype=object)
    for r, row in enumerate(entries):
        scale = math.lcm(*(Fraction(x).denominator for x in row)) if row.size else 1
        out[r] = [int(Fraction(x) * scale) for x in row]
    return out


def _eliminate(matrix: Matrix, *, reduced: bool) -> tuple[np.ndarray, list[int]]:
    """Row-reduce *matrix*; return the nonzero echelon rows and pivot columns.

    Over QQ this is Bareiss elimination on integer rows: every update is
    ``(lead * row - factor * pivot_row) / previous_lead``, an exact division,
    so entries stay minors of the input and pivots are not normalized.  A row
    with a zero in the pivot column is skipped and catches up on its scale
    the next time it is touched.  Over GF(p) pivots are 1.  With ``reduced``
    the entries above every pivot are cleared as well.
    """
    field = matrix.field
    field.check_array(matrix.entries)
    p = field.characteristic
    work = matrix.entries.copy() if p else _integer_rows(matrix.entries)
    nrows, ncols = work.shape
    # Bareiss scale each row was last brought to
    scale = [1] * nrows
    previous = 1
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        candidates = np.flatnonzero(work[r:, c] != 0)
        if candidates.size == 0:
            continue
        k = r + int(candidates[0])
        if k != r:
            work[[r, k]] = work[[k, r]]
            scale[r], scale[k] = scale[k], scale[r]
        if p:
            work[r] = work[r] * pow(int(work[r, c]), -1, p) % p
        elif scale[r] != previous:
            work[r] = work[r] * previous // scale[r]
        pivot_row = work[r]
        lead = pivot_row[c]
        scan = work[:, c] if reduced else work[r + 1 :, c]
        offset = 0 if reduced else r + 1
        for i in np.flatnonzero(scan != 0):
            i = int(i) + offset
            if i == r:
                continue
            if p:
                work[i] = (work[i] - work[i, c] * pivot_row) % p
                continue
            row = work[i]
            if scale[i] != previous:
                row = row * previous // scale[i]
            work[i] = (lead * row - row[c] * pivot_row) // previous
            scale[i] = lead
        if not p:
            scale[r] = lead
            previous = lead
        pivots.append(c)
        r += 1
    return work[:r], pivots


def rank(matrix: Matrix) -> int:
    """Dimension of the column space, by fraction-free elimination."""
    _, pivots = _eliminate(matrix, reduced=False)
    log.debug("rank of %dx%d matrix = %d", matrix.rows, matrix.cols, len(pivots))
    return len(pivots)


def rref(matrix: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form (nonzero rows only) and its pivot columns."""
    rows, pivots = _eliminate(matrix, reduced=True)
    field = matrix.field
    if not field.is_prime_field:
        for r, c in enumerate(pivots):
            scale = Fraction(1, rows[r, c])
            rows[r] = [field.scalar(x * scale) for x in rows[r]]
    return Matrix(field, rows.reshape(len(pivots), matrix.cols)), pivots


def kernel_basis(matrix: Matrix) -> list[np.ndarray]:
    """Basis of ``{x : Mx = 0}``, one vector per free column in increasing order.

    Each vector has a 1 in its free column, zeros in the other free columns
    and the negated reduced-echelon entries in the pivot columns.
    """
    reduced, pivots = rref(matrix)
    field = matrix.field
    pivot_set = set(pivots)
    basis = []
    for free in range(matrix.cols):
        if free in pivot_set:
            continue
        vec = field.zeros(matrix.cols)
        vec[free] = 1
        for r, c in enumerate(pivots):
            vec[c] = field.scalar(-reduced.entries[r, free])
        basis.append(vec)
    return basis


def solve(matrix: Matrix, rhs: np.ndarray) -> np.ndarray | None:
    """One solution of ``Mx = b`` with every free variable set to 0, or None."""
    rhs = np.asarray(rhs, dtype=object)
    if rhs.shape != (matrix.rows,):
        raise InvalidInputError(
            f"right-hand side has shape {rhs.shape}, expected ({matrix.rows},)"
        )
    matrix.field.check_array(rhs)
    augmented = matrix.hstack(rhs.reshape(-1, 1))
    reduced, pivots = rref(augmented)
    if pivots and pivots[-1] == matrix.cols:
        return None
    x = matrix.field.zeros(matrix.cols)
    for r, c in enumerate(pivots):
        x[c] = reduced.entries[r, matrix.cols]
    return x


def pivot_columns(matrix: Matrix) -> list[int]:
    """Columns that are not in the span of the columns before them."""
    _, pivots = _eliminate(matrix, reduced=False)
    return pivots


def columns_matrix(field: Field, vectors: list[np.ndarray], length: int) -> Matrix:
    """Stack vectors as the columns of a ``length x len(vectors)`` matrix."""
    if not vectors:
        return Matrix.zeros(field, length, 0)
    return Matrix(field, np.stack(vectors, axis=1))


def inverse(matrix: Matrix) -> Matrix:
    """Inverse of a square matrix; raises on singular input."""
    n = matrix.rows
    if matrix.cols != n:
        raise InvalidInputError(f"cannot invert a {matrix.rows}x{matrix.cols} matrix")
    reduced, pivots = rref(matrix.hstack(Matrix.identity(matrix.field, n)))
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise InvalidInputError("matrix is singular")
    return Matrix(matrix.field, reduced.entries[:, n:].copy())


def column_space_representatives(
    field: Field, image: list[np.ndarray], candidates: list[np.ndarray], length: int
) -> list[int]:
    """Indices of *candidates* that extend a basis of span(image) greedily.

    The chosen candidates project to a basis of the quotient
    ``span(image + candidates) / span(image)``.
    """
    stacked = columns_matrix(field, [*image, *candidates], length)
    offset = len(image)
    return [c - offset for c in pivot_columns(stacked) if c >= offset]
